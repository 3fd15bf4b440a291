"""Parameter distributions and seeded initialization.

Seed splitting: a master seed feeds ``numpy.random.SeedSequence(seed)``; its
first four children drive the roles ``w1, b1, w2, b2`` in that order. Each
role draws its values sequentially, so the first ``N`` neurons of a width-``2N``
network coincide with a width-``N`` network built from the same seed.
Monte-Carlo routines process draws in chunks of ``CHUNK`` samples; chunk
``c`` uses child ``c`` of ``SeedSequence(seed)`` and splits it again per role.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from numpy.polynomial.legendre import leggauss

from .activations import Activation
from .networks import ROLES, ShallowMLP, ShallowZeNN

CHUNK = 1 << 16


@dataclass(frozen=True)
class Normal:
    mean: float = 0.0
    std: float = 1.0

    def __post_init__(self):
        if not self.std > 0:
            raise ValueError("Normal std must be positive")

    def sample(self, rng, size):
        return rng.normal(self.mean, self.std, size=size)

    def moment(self, k: int) -> float:
        prev, cur = 1.0, self.mean
        if k == 0:
            return 1.0
        for i in range(2, k + 1):
            prev, cur = cur, self.mean * cur + (i - 1) * self.std ** 2 * prev
        return cur

    def quadrature(self, n):
        z, w = hermegauss(n)
        return self.mean + self.std * z, w / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class Uniform:
    lo: float = -1.0
    hi: float = 1.0

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError("Uniform requires lo < hi")

    def sample(self, rng, size):
        return rng.uniform(self.lo, self.hi, size=size)

    def moment(self, k: int) -> float:
        return (self.hi ** (k + 1) - self.lo ** (k + 1)) / ((k + 1) * (self.hi - self.lo))

    def quadrature(self, n):
        z, w = leggauss(n)
        half = 0.5 * (self.hi - self.lo)
        return 0.5 * (self.hi + self.lo) + half * z, 0.5 * w


@dataclass(frozen=True)
class Constant:
    value: float = 0.0

    def sample(self, rng, size):
        return np.full(size, float(self.value))

    def moment(self, k: int) -> float:
        return float(self.value) ** k

    def quadrature(self, n):
        return np.array([float(self.value)]), np.array([1.0])


Distribution = Union[Normal, Uniform, Constant]


def parse_distribution(doc) -> Distribution:
    """Build a distribution from ``{"dist": "normal", "mean": 0, "std": 1}``-style mappings."""
    if isinstance(doc, (Normal, Uniform, Constant)):
        return doc
    doc = dict(doc)
    kind = str(doc.pop("dist", "")).lower()
    cls = {"normal": Normal, "uniform": Uniform, "constant": Constant}.get(kind)
    if cls is None:
        raise ValueError(f"unknown distribution {kind!r}; expected normal, uniform or constant")
    try:
        return cls(**doc)
    except TypeError as exc:
        raise ValueError(f"bad parameters for {kind} distribution: {exc}") from None


def distribution_to_dict(dist: Distribution) -> dict:
    name = {Normal: "normal", Uniform: "uniform", Constant: "constant"}[type(dist)]
    return {"dist": name, **dist.__dict__}


@dataclass(frozen=True)
class InitSpec:
    """Per-role i.i.d. distributions, shared by every neuron index."""

    w1: Distribution = field(default_factory=Normal)
    b1: Distribution = field(default_factory=Constant)
    w2: Distribution = field(default_factory=Normal)
    b2: Distribution = field(default_factory=Constant)
    seed: int = 0

    def role_generators(self, seed=None):
        seq = np.random.SeedSequence(self.seed if seed is None else seed)
        return [np.random.default_rng(s) for s in seq.spawn(4)]

    def sample_roles(self, size, seed=None) -> dict:
        gens = self.role_generators(seed)
        return {role: getattr(self, role).sample(g, size) for role, g in zip(ROLES, gens)}

    def chunks(self, samples: int, width: int):
        """Yield per-chunk role draws of shape ``(chunk, width)`` covering ``samples`` rows."""
        n_chunks = -(-samples // CHUNK)
        children = np.random.SeedSequence(self.seed).spawn(n_chunks)
        for c, child in enumerate(children):
            rows = min(CHUNK, samples - c * CHUNK)
            gens = [np.random.default_rng(s) for s in child.spawn(4)]
            yield {role: getattr(self, role).sample(g, (rows, width)) for role, g in zip(ROLES, gens)}


@dataclass(frozen=True)
class ShallowArch:
    """Architecture of a shallow scalar network: ``kind`` is ``"zenn"`` or ``"mlp"``."""

    kind: str = "zenn"
    n: int = 64
    activation: Activation = Activation.SINE
    alpha: float = 1.1
    beta: float = 0.5

    def __post_init__(self):
        if self.kind not in ("zenn", "mlp"):
            raise ValueError(f"unknown shallow architecture {self.kind!r}")
        if self.n < 1:
            raise ValueError("width must be positive")
        object.__setattr__(self, "activation", Activation.parse(self.activation))

    def build(self, w1, b1, w2, b2):
        if self.kind == "zenn":
            return ShallowZeNN(w1, b1, w2, b2, self.activation, alpha=self.alpha)
        return ShallowMLP(w1, b1, w2, b2, self.activation, beta=self.beta)

    def evaluate(self, draws: dict, x: float) -> np.ndarray:
        """Network outputs at ``x`` for a batch of parameter rows of shape ``(samples, n)``."""
        w1, b1, w2, b2 = (draws[r] for r in ROLES)
        if self.kind == "zenn":
            j = np.arange(1, w1.shape[-1] + 1, dtype=np.float64)
            terms = j ** (-self.alpha) * (w2 * self.activation(w1 * j * x + b1) + b2)
            return terms.sum(axis=-1)
        terms = w2 * self.activation(w1 * x + b1) + b2
        return float(w1.shape[-1]) ** (-self.beta) * terms.sum(axis=-1)


def init_model(arch: ShallowArch, spec: InitSpec | None = None):
    """Draw a shallow network; the default spec is unit-normal weights and zero biases."""
    spec = InitSpec() if spec is None else spec
    draws = spec.sample_roles(arch.n)
    return arch.build(**draws)


def sample_outputs(arch: ShallowArch, spec: InitSpec, x: float, samples: int) -> np.ndarray:
    """Network outputs at ``x`` under ``samples`` independent parameter draws."""
    return np.concatenate([arch.evaluate(d, x) for d in spec.chunks(samples, arch.n)])
