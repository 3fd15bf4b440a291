"""Characteristic functions of shallow networks at a fixed input.

For the ReLU network ``f(x) = sum_j relu(j W_j x + b_j) / j**alpha`` with
``W_j ~ U(-L, L)`` and ``b_j ~ U(-B, B)`` independent, the characteristic
function factorises over neurons and each factor has a closed form.
"""
from __future__ import annotations

import csv
import io
import math

import numpy as np

from .activations import Activation
from .initialization import Constant, InitSpec, ShallowArch, Uniform, sample_outputs


def _sinc_minus_one(b: float) -> float:
    """``sin(b)/b - 1`` without cancellation near zero."""
    if abs(b) < 0.1:
        b2 = b * b
        return -b2 / 6.0 + b2 * b2 / 120.0 - b2 ** 3 / 5040.0 + b2 ** 4 / 362880.0
    return math.sin(b) / b - 1.0


def _half_factor(a: float, b: float) -> complex:
    """``(exp(i a) sin(b)/b - 1) / (2 i a)`` for ``a != 0``, evaluated stably."""
    expm1 = complex(-2.0 * math.sin(0.5 * a) ** 2, math.sin(a))
    sinc = 1.0 + _sinc_minus_one(b)
    return (expm1 * sinc + _sinc_minus_one(b)) / (2j * a)


def relu_uniform_factor(j: int, x: float, t: float, L: float, B: float, alpha: float) -> complex:
    """``E[exp(i t relu(j W x + b) / j**alpha)]`` for one neuron.

    The branch is chosen per neuron by ``j L x <= B``; both closed forms agree
    on the boundary. At ``t = 0`` the factor is exactly 1.
    """
    s = t / j ** alpha
    if s == 0.0:
        return 1.0 + 0.0j
    reach = j * x * L
    if reach <= B:
        core = _half_factor(B * s, reach * s)
    else:
        core = _half_factor(reach * s, B * s)
    return core + 0.5


def charfn_relu_uniform(x: float, t: float, L: float, B: float, alpha: float, n: int) -> complex:
    """Product over ``j = 1..n`` of the per-neuron closed-form factors."""
    if not x > 0:
        raise ValueError("the closed form is derived for x > 0 only")
    if not (L > 0 and B > 0):
        raise ValueError("L and B must be positive")
    value = 1.0 + 0.0j
    for j in range(1, int(n) + 1):
        value *= relu_uniform_factor(j, x, t, L, B, alpha)
    return value


def relu_uniform_family(n: int, alpha: float, L: float, B: float, seed: int = 0) -> tuple[ShallowArch, InitSpec]:
    """The ReLU network with uniform inner weights and biases and unit outer weights."""
    arch = ShallowArch("zenn", n, Activation.RELU, alpha=alpha)
    spec = InitSpec(w1=Uniform(-L, L), b1=Uniform(-B, B), w2=Constant(1.0), b2=Constant(0.0), seed=seed)
    return arch, spec


def charfn_mc(arch: ShallowArch, spec: InitSpec, x: float, t, samples: int = 10 ** 5):
    """Monte-Carlo estimate of ``E[exp(i t f(x))]`` and its standard error.

    ``t`` may be a scalar or an array; the same parameter draws serve every ``t``.
    """
    if samples < 10 ** 4:
        raise ValueError("at least 10**4 samples are required")
    f = sample_outputs(arch, spec, x, samples)
    t_arr = np.asarray(t, dtype=np.float64)
    phase = np.multiply.outer(t_arr.reshape(-1), f)
    z = np.exp(1j * phase)
    est = z.mean(axis=-1)
    err = np.sqrt((z.real.var(axis=-1, ddof=1) + z.imag.var(axis=-1, ddof=1)) / samples)
    if t_arr.ndim == 0:
        return complex(est[0]), float(err[0])
    return est.reshape(t_arr.shape), err.reshape(t_arr.shape)


def charfn_rows_to_csv(rows, path=None) -> str:
    """Rows of ``(x, t, re, im, mc_re, mc_im, mc_stderr)``; missing Monte-Carlo values stay blank."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["x", "t", "re", "im", "mc_re", "mc_im", "mc_stderr"])
    for row in rows:
        writer.writerow(["" if v is None else repr(float(v)) for v in row])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text
