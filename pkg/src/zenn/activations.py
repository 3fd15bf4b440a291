"""Pointwise activation functions and their derivatives."""
from __future__ import annotations

import enum

import numpy as np


class Activation(str, enum.Enum):
    """Scalar activation with an analytic derivative.

    Every member is total on the reals. ReLU uses the subgradient 0 at the
    kink so that tangent-kernel formulas stay defined everywhere.
    """

    SINE = "sine"
    COSINE = "cosine"
    RELU = "relu"
    SIGMOID = "sigmoid"
    IDENTITY = "identity"

    @classmethod
    def parse(cls, value: "Activation | str") -> "Activation":
        if isinstance(value, Activation):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            valid = ", ".join(m.value for m in cls)
            raise ValueError(f"unknown activation {value!r}; expected one of: {valid}") from None

    @property
    def growth_order(self) -> int:
        """Polynomial growth order k with |sigma(x)| <~ 1 + |x|**k."""
        return 1 if self in (Activation.RELU, Activation.IDENTITY) else 0

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        if self is Activation.SINE:
            return np.sin(x)
        if self is Activation.COSINE:
            return np.cos(x)
        if self is Activation.RELU:
            return np.maximum(x, 0.0)
        if self is Activation.SIGMOID:
            return 0.5 * (1.0 + np.tanh(0.5 * x))
        return x.copy()

    def derivative(self, x):
        x = np.asarray(x, dtype=np.float64)
        if self is Activation.SINE:
            return np.cos(x)
        if self is Activation.COSINE:
            return -np.sin(x)
        if self is Activation.RELU:
            return (x > 0.0).astype(np.float64)
        if self is Activation.SIGMOID:
            s = 0.5 * (1.0 + np.tanh(0.5 * x))
            return s * (1.0 - s)
        return np.ones_like(x)

    def value_and_derivative(self, x):
        return self(x), self.derivative(x)


def activation_eval(act: Activation | str, x: float) -> tuple[float, float]:
    """Return ``(sigma(x), sigma'(x))`` for a scalar ``x``."""
    act = Activation.parse(act)
    value, deriv = act.value_and_derivative(float(x))
    return float(value), float(deriv)
