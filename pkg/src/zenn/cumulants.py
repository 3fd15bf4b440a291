"""Cumulants of perceptrons and of shallow networks at a fixed input.

Network cumulants of a ZeNN add over neurons,
``lambda_N^(r)(x) = sum_j lambda^(r)(j x) / j**(r alpha)``, where
``lambda^(r)`` is the cumulant of a single perceptron
``w2 * sigma(w1 x + b1) + b2``. Perceptron cumulants are computed here by
tensor-product Gauss quadrature over the role distributions, and estimated
from samples with unbiased k-statistics.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from math import comb
from typing import Callable, Union

import numpy as np

from .activations import Activation
from .initialization import InitSpec, ShallowArch, sample_outputs

MAX_ORDER = 4


@dataclass(frozen=True)
class KStatistics:
    estimates: np.ndarray
    stderr: np.ndarray
    n: int

    def __getitem__(self, r: int) -> tuple[float, float]:
        return float(self.estimates[r - 1]), float(self.stderr[r - 1])


def _kstats_rows(x: np.ndarray, max_order: int) -> np.ndarray:
    """Unbiased k-statistics of each row of ``x``; returns shape ``(rows, max_order)``."""
    n = x.shape[-1]
    mean = x.mean(axis=-1)
    d = x - mean[..., None]
    d2 = d * d
    m2 = d2.mean(axis=-1)
    out = [mean]
    if max_order >= 2:
        out.append(n / (n - 1) * m2)
    if max_order >= 3:
        m3 = (d2 * d).mean(axis=-1)
        out.append(n * n / ((n - 1) * (n - 2)) * m3)
    if max_order >= 4:
        m4 = (d2 * d2).mean(axis=-1)
        out.append(n * n * ((n + 1) * m4 - 3 * (n - 1) * m2 * m2) / ((n - 1) * (n - 2) * (n - 3)))
    return np.stack(out, axis=-1)


def _batches(x: np.ndarray) -> np.ndarray:
    n_batches = math.isqrt(x.size)
    size = x.size // n_batches
    return x[: n_batches * size].reshape(n_batches, size)


def k_statistics(sample, max_order: int = MAX_ORDER) -> KStatistics:
    """k-statistics ``k_1..k_max_order`` with standard errors from ``sqrt(n)`` batches."""
    if not 1 <= max_order <= MAX_ORDER:
        raise ValueError(f"max_order must be between 1 and {MAX_ORDER}")
    x = np.asarray(sample, dtype=np.float64).reshape(-1)
    if x.size < max_order + 1:
        raise ValueError(f"need at least {max_order + 1} samples for order {max_order}, got {x.size}")
    est = _kstats_rows(x, max_order)
    err = np.full(max_order, np.nan)
    batches = _batches(x)
    if batches.shape[0] >= 2 and batches.shape[1] >= max_order + 1:
        per_batch = _kstats_rows(batches, max_order)
        err = per_batch.std(axis=0, ddof=1) / math.sqrt(batches.shape[0])
    return KStatistics(est, err, x.size)


def excess_kurtosis(sample) -> tuple[float, float]:
    """``k4 / k2**2`` with a batched standard error."""
    x = np.asarray(sample, dtype=np.float64).reshape(-1)
    if x.size < 5:
        raise ValueError("need at least 5 samples")
    k = _kstats_rows(x, 4)
    per_batch = _kstats_rows(_batches(x), 4)
    ratios = per_batch[:, 3] / per_batch[:, 1] ** 2
    return float(k[3] / k[1] ** 2), float(ratios.std(ddof=1) / math.sqrt(ratios.size))


def cumulants_from_moments(m) -> np.ndarray:
    """Cumulants ``kappa_1..kappa_4`` from raw moments ``m[0..4]`` with ``m[0] = 1``."""
    m1, m2, m3, m4 = (m[k] for k in range(1, 5))
    return np.array([
        m1,
        m2 - m1 ** 2,
        m3 - 3 * m2 * m1 + 2 * m1 ** 3,
        m4 - 4 * m3 * m1 - 3 * m2 ** 2 + 12 * m2 * m1 ** 2 - 6 * m1 ** 4,
    ])


def perceptron_moments(spec: InitSpec, activation, x: float, max_order: int = MAX_ORDER,
                       nodes: int = 200) -> np.ndarray:
    """Raw moments ``E[p**m]``, ``m = 0..max_order``, of ``p = w2 sigma(w1 x + b1) + b2``.

    The roles are independent, so ``E[p**m]`` expands binomially into moments
    of ``w2``, ``b2`` and of ``sigma(w1 x + b1)``; the last uses a 2-D Gauss rule.
    Accurate for smooth activations; kinked ones (ReLU) converge slowly.
    """
    act = Activation.parse(activation)
    wn, ww = spec.w1.quadrature(nodes)
    bn, bw = spec.b1.quadrature(nodes)
    s = act(wn[:, None] * x + bn[None, :])
    weights = ww[:, None] * bw[None, :]
    s_mom = [1.0] + [float(np.sum(weights * s ** k)) for k in range(1, max_order + 1)]
    moments = np.zeros(max_order + 1)
    for m in range(max_order + 1):
        moments[m] = sum(
            comb(m, k) * spec.w2.moment(k) * s_mom[k] * spec.b2.moment(m - k) for k in range(m + 1)
        )
    return moments


def perceptron_cumulant(spec: InitSpec, activation, x: float, r: int, nodes: int = 200) -> float:
    """``lambda^(r)(x)`` of a single perceptron by quadrature."""
    if not 1 <= r <= MAX_ORDER:
        raise ValueError(f"order must be between 1 and {MAX_ORDER}")
    return float(cumulants_from_moments(perceptron_moments(spec, activation, x, MAX_ORDER, nodes))[r - 1])


def perceptron_cumulant_function(spec: InitSpec, activation, r: int, nodes: int = 200) -> Callable:
    """Vectorized ``z -> lambda^(r)(z)``."""
    def lam(z):
        z = np.asarray(z, dtype=np.float64)
        flat = np.array([perceptron_cumulant(spec, activation, float(v), r, nodes) for v in z.ravel()])
        return flat.reshape(z.shape) if z.ndim else float(flat[0])

    return lam


def perceptron_cumulant_mc(spec: InitSpec, activation, x: float, r: int, samples: int = 10 ** 6):
    """Monte-Carlo k-statistic of order ``r`` for one perceptron; returns ``(estimate, stderr)``."""
    if samples < 10 ** 4:
        raise ValueError("at least 10**4 samples are required")
    arch = ShallowArch("mlp", 1, activation, beta=1.0)
    return k_statistics(sample_outputs(arch, spec, x, samples), r)[r]


def network_cumulant_mc(arch: ShallowArch, spec: InitSpec, x: float, r: int, samples: int = 10 ** 6):
    """Monte-Carlo k-statistic of order ``r`` of the network output at ``x``."""
    if samples < 10 ** 4:
        raise ValueError("at least 10**4 samples are required")
    return k_statistics(sample_outputs(arch, spec, x, samples), r)[r]


def _tail_term_bound(j: np.ndarray, x: float, r: int, alpha: float, k: int) -> np.ndarray:
    return (1.0 + np.abs(j * x)) ** (r * k) / j ** (r * alpha)


def zenn_cumulant_series(lam: Union[Callable, float], r: int, alpha: float, x: float, n,
                         growth_order: int = 0, tol: float = 1e-12, max_terms: int = 10 ** 8,
                         chunk: int = 1 << 16) -> float:
    """Partial sum ``sum_{j=1..n} lam(j x) / j**(r alpha)``.

    ``n = math.inf`` sums until the term bound ``(1 + |j x|)**(r k) / j**(r alpha)``
    drops below ``tol``; this requires ``r alpha > 1`` at ``x = 0`` and
    ``r (alpha - k) > 1`` otherwise, where ``k`` is the activation growth order.
    """
    f = lam if callable(lam) else (lambda z, c=float(lam): np.full(np.shape(z), c))
    if n != math.inf:
        n = int(n)
        if n < 1:
            raise ValueError("width must be positive")
        j = np.arange(1, n + 1, dtype=np.float64)
        return float(np.sum(np.asarray(f(j * x), dtype=np.float64) / j ** (r * alpha)))
    k = 0 if x == 0 else int(growth_order)
    if r * (alpha - k) <= 1:
        raise ValueError(
            f"the infinite-width cumulant series needs r*(alpha - k) > 1; got r={r}, alpha={alpha}, k={k}"
        )
    total, start = 0.0, 1
    while start <= max_terms:
        j = np.arange(start, start + chunk, dtype=np.float64)
        bound = _tail_term_bound(j, x, r, alpha, k)
        below = np.flatnonzero(bound < tol)
        stop = below[0] if below.size else j.size
        j = j[:stop]
        if j.size:
            total += float(np.sum(np.asarray(f(j * x), dtype=np.float64) / j ** (r * alpha)))
        if below.size:
            return total
        start += chunk
    raise ValueError(f"series did not reach tolerance {tol} within {max_terms} terms")


def mlp_cumulant_scaling(lam: float, r: int, n: int) -> float:
    """Cumulant of order ``r`` of a ``1/sqrt(N)``-averaged MLP built from zero-mean perceptrons."""
    return float(lam) / float(n) ** (r / 2.0 - 1.0)


@dataclass(frozen=True)
class CumulantReport:
    order: int
    width: int
    alpha: float
    x: float
    analytic: float
    mc_estimate: float
    mc_stderr: float
    samples: int

    @property
    def z_score(self) -> float:
        return (self.mc_estimate - self.analytic) / self.mc_stderr


def cumulant_report(spec: InitSpec, activation, alpha: float, x: float, r: int, n: int,
                    samples: int = 10 ** 6, nodes: int = 200) -> CumulantReport:
    """Quadrature partial sum next to a width-``n`` Monte-Carlo k-statistic."""
    if samples < 10 ** 4:
        raise ValueError("at least 10**4 samples are required")
    lam = perceptron_cumulant_function(spec, activation, r, nodes)
    analytic = zenn_cumulant_series(lam, r, alpha, x, n)
    est, err = network_cumulant_mc(ShallowArch("zenn", n, activation, alpha=alpha), spec, x, r, samples)
    return CumulantReport(r, n, alpha, x, analytic, est, err, samples)


def reports_to_csv(rows, path=None) -> str:
    """Rows of ``(N, analytic, mc, stderr)``; missing values are left blank."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["N", "analytic", "mc", "stderr"])
    for n, analytic, mc, err in rows:
        writer.writerow([n] + ["" if v is None else repr(float(v)) for v in (analytic, mc, err)])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text
