"""Deep coordinate-regression models for image fitting.

Every variant shares the same trunk: a first embedding layer, ``depth`` ReLU
layers of ``hidden`` units and a linear output layer. The variants differ only
in the first layer:

``mlp``           ReLU dense layer of ``mlp_units`` units
``ozenn``         sine and cosine oZeNN branches, concatenated
``radzenn``       sine and cosine radZeNN branches, concatenated
``randozenn``     sine and cosine randoZeNN branches with ``m`` lattice points each
``ff``            frozen Fourier features with ``n`` frequencies of scale ``rho``
``ff-trainable``  the same embedding with trainable frequencies

Seed splitting: ``SeedSequence(seed)`` spawns one child per layer in order
(first-layer branches first, then hidden layers, then the output layer); a
randoZeNN branch uses its child for the index matrix and that child's own
spawned stream for the weights.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .deep import DeepModel
from .layers import Concat, Dense, FourierFeatures, OZeNN, RadZeNN, RandoZeNN

VARIANTS = ("mlp", "ozenn", "radzenn", "randozenn", "ff", "ff-trainable")


@dataclass(frozen=True)
class ImageModelSpec:
    variant: str = "randozenn"
    n: int = 64
    m: int = 512
    alpha: float = 0.0
    rho: float = 10.0
    mlp_units: int = 1024
    hidden: int = 64
    depth: int = 3
    input_dim: int = 2
    output_dim: int = 3
    seed: int = 0

    def __post_init__(self):
        variant = str(self.variant).lower()
        if variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; valid variants: {', '.join(VARIANTS)}")
        object.__setattr__(self, "variant", variant)
        for name in ("n", "m", "mlp_units", "hidden", "input_dim", "output_dim"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.depth < 0:
            raise ValueError("depth must be non-negative")
        if self.alpha < 0 or self.rho <= 0:
            raise ValueError("alpha must be non-negative and rho positive")

    def to_dict(self) -> dict:
        return asdict(self)


def _dense(rng, fan_in, fan_out, activation, gain):
    W = rng.normal(0.0, np.sqrt(gain / fan_in), size=(fan_in, fan_out))
    return Dense(fan_in, fan_out, activation, 0.0, W, np.zeros(fan_out))


def _first_layer(spec: ImageModelSpec, seeds):
    d = spec.input_dim
    if spec.variant == "mlp":
        rng = np.random.default_rng(seeds[0])
        W = rng.normal(size=(d, spec.mlp_units))
        return Dense(d, spec.mlp_units, "relu", 0.0, W, np.zeros(spec.mlp_units))
    if spec.variant in ("ff", "ff-trainable"):
        return FourierFeatures.sample(d, spec.n, spec.rho, seeds[0], trainable=spec.variant == "ff-trainable")
    branches = []
    for act, seed in zip(("sine", "cosine"), seeds[:2]):
        if spec.variant == "randozenn":
            index = RandoZeNN.sample_index(d, spec.n, spec.m, seed)
            rng = np.random.default_rng(seed.spawn(1)[0])
            W = rng.normal(size=(spec.m, d))
            branches.append(RandoZeNN(d, spec.n, spec.m, index, act, spec.alpha, W, np.zeros(spec.m)))
        elif spec.variant == "ozenn":
            rng = np.random.default_rng(seed)
            branches.append(OZeNN(d, spec.n, act, spec.alpha, rng.normal(size=(d, spec.n)), np.zeros((d, spec.n))))
        else:
            rng = np.random.default_rng(seed)
            branches.append(RadZeNN(d, spec.n, act, spec.alpha, rng.normal(size=(d, spec.n)), np.zeros(spec.n)))
    return Concat(branches)


def build_image_model(spec: ImageModelSpec | None = None, **overrides) -> DeepModel:
    """Construct an initialized image model.

    The first layer draws unit-normal weights with zero biases. The ReLU
    trunk uses He-normal weights so that plain gradient descent stays stable,
    and the linear head uses variance ``1 / fan_in``.
    """
    spec = ImageModelSpec(**{**(spec.to_dict() if spec else {}), **overrides})
    seeds = np.random.SeedSequence(spec.seed).spawn(2 + spec.depth + 1)
    first = _first_layer(spec, seeds[:2])
    layers = [first]
    width = first.output_dim
    for k in range(spec.depth):
        layers.append(_dense(np.random.default_rng(seeds[2 + k]), width, spec.hidden, "relu", 2.0))
        width = spec.hidden
    layers.append(_dense(np.random.default_rng(seeds[-1]), width, spec.output_dim, "identity", 1.0))
    return DeepModel(layers)
