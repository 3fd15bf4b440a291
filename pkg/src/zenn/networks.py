"""Shallow scalar networks: the frequency-scaled ZeNN and the averaged MLP.

Both networks hold one perceptron per index ``j = 1..N`` with parameters
``(w1, b1, w2, b2)``. Flat parameter vectors are ordered by role blocks::

    [w1_1..w1_N, b1_1..b1_N, w2_1..w2_N, b2_1..b2_N]
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .activations import Activation

ROLES = ("w1", "b1", "w2", "b2")


class NeuronParams(NamedTuple):
    w1: float
    b1: float
    w2: float
    b2: float


def _as_param(name, value, n=None):
    arr = np.array(value, dtype=np.float64).reshape(-1)
    if n is not None and arr.shape[0] != n:
        raise ValueError(f"{name} has {arr.shape[0]} entries, expected {n}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class _Shallow:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    activation: Activation

    def __post_init__(self):
        n = np.asarray(self.w1).reshape(-1).shape[0]
        if n < 1:
            raise ValueError("a shallow network needs at least one neuron")
        for role in ROLES:
            object.__setattr__(self, role, _as_param(role, getattr(self, role), n))
        object.__setattr__(self, "activation", Activation.parse(self.activation))

    n_inputs = 1
    n_outputs = 1

    @property
    def n(self) -> int:
        return self.w1.shape[0]

    @property
    def n_params(self) -> int:
        return 4 * self.n

    @property
    def neurons(self) -> list[NeuronParams]:
        return [NeuronParams(*map(float, p)) for p in zip(self.w1, self.b1, self.w2, self.b2)]

    def parameters(self) -> np.ndarray:
        return np.concatenate([self.w1, self.b1, self.w2, self.b2])

    def with_parameters(self, theta):
        theta = np.asarray(theta, dtype=np.float64).reshape(-1)
        if theta.shape[0] != self.n_params:
            raise ValueError(f"expected {self.n_params} parameters, got {theta.shape[0]}")
        w1, b1, w2, b2 = np.split(theta, 4)
        return self._replace(w1=w1, b1=b1, w2=w2, b2=b2)

    def _replace(self, **changes):
        fields = {k: getattr(self, k) for k in self.__dataclass_fields__}
        fields.update(changes)
        return type(self)(**fields)

    def truncate(self, n: int):
        """Network made of the first ``n`` neurons."""
        return self._replace(w1=self.w1[:n], b1=self.b1[:n], w2=self.w2[:n], b2=self.b2[:n])

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, k), getattr(other, k))
            if isinstance(getattr(self, k), np.ndarray)
            else getattr(self, k) == getattr(other, k)
            for k in self.__dataclass_fields__
        )

    __hash__ = None

    # batch protocol shared with DeepModel: X is (n, 1), outputs are (n, 1)
    def forward(self, X):
        X = np.asarray(X, dtype=np.float64)
        return self(X.reshape(-1)).reshape(-1, 1)

    def vjp(self, X, upstream):
        """Gradient of ``sum(upstream * forward(X))`` with respect to the flat parameters."""
        x = np.asarray(X, dtype=np.float64).reshape(-1)
        g = np.asarray(upstream, dtype=np.float64).reshape(-1)
        return g @ self.jacobian(x)

    def residual_gradient(self, X, Y):
        """Predictions and the gradient of ``0.5 * sum((f(X) - Y)**2)``."""
        x = np.asarray(X, dtype=np.float64).reshape(-1)
        J = self.jacobian(x)
        pred = self.forward(x)
        return pred, (pred - np.asarray(Y, dtype=np.float64).reshape(pred.shape)).reshape(-1) @ J


@dataclass(frozen=True, eq=False)
class ShallowZeNN(_Shallow):
    """``f(x) = sum_j j**-alpha * (w2_j * sigma(w1_j * j * x + b1_j) + b2_j)``.

    Indices run over ``j = 1..N``; the ``j = 0`` term is undefined for the
    decay weight and is omitted.
    """

    alpha: float = 1.0

    def __post_init__(self):
        super().__post_init__()
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        object.__setattr__(self, "alpha", float(self.alpha))

    @property
    def index(self) -> np.ndarray:
        return np.arange(1, self.n + 1, dtype=np.float64)

    @property
    def decay(self) -> np.ndarray:
        return self.index ** (-self.alpha)

    def preactivation(self, x):
        x = np.asarray(x, dtype=np.float64)
        return self.w1 * self.index * x[..., None] + self.b1

    def __call__(self, x):
        u = self.preactivation(x)
        return (self.decay * (self.w2 * self.activation(u) + self.b2)).sum(axis=-1)

    def jacobian(self, x):
        x = np.asarray(x, dtype=np.float64)
        j = self.index
        u = self.preactivation(x)
        s, ds = self.activation.value_and_derivative(u)
        decay = self.decay
        d_w1 = j ** (1.0 - self.alpha) * self.w2 * x[..., None] * ds
        d_b1 = decay * self.w2 * ds
        d_w2 = decay * s
        d_b2 = np.broadcast_to(decay, u.shape)
        return np.concatenate([d_w1, d_b1, d_w2, d_b2], axis=-1)


@dataclass(frozen=True, eq=False)
class ShallowMLP(_Shallow):
    """``g(x) = N**-beta * sum_j (w2_j * sigma(w1_j * x + b1_j) + b2_j)``."""

    beta: float = 0.5

    def __post_init__(self):
        super().__post_init__()
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        object.__setattr__(self, "beta", float(self.beta))

    @property
    def scale(self) -> float:
        return float(self.n) ** (-self.beta)

    def preactivation(self, x):
        x = np.asarray(x, dtype=np.float64)
        return self.w1 * x[..., None] + self.b1

    def __call__(self, x):
        u = self.preactivation(x)
        return self.scale * (self.w2 * self.activation(u) + self.b2).sum(axis=-1)

    def jacobian(self, x):
        x = np.asarray(x, dtype=np.float64)
        u = self.preactivation(x)
        s, ds = self.activation.value_and_derivative(u)
        c = self.scale
        d_w1 = c * self.w2 * x[..., None] * ds
        d_b1 = c * self.w2 * ds
        d_w2 = c * s
        d_b2 = np.full(u.shape, c)
        return np.concatenate([d_w1, d_b1, d_w2, d_b2], axis=-1)


def from_neurons(kind: str, neurons: Sequence[Sequence[float]], activation, **hyper):
    """Build a shallow network from a list of ``(w1, b1, w2, b2)`` tuples."""
    arr = np.asarray(neurons, dtype=np.float64).reshape(-1, 4)
    cls = {"zenn": ShallowZeNN, "mlp": ShallowMLP}[kind]
    return cls(arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3], activation, **hyper)


def zenn_forward(model: ShallowZeNN, x):
    out = model(x)
    return float(out) if np.ndim(out) == 0 else out


def mlp_forward(model: ShallowMLP, x):
    out = model(x)
    return float(out) if np.ndim(out) == 0 else out


def zenn_backward(model: ShallowZeNN, x) -> np.ndarray:
    """Parameter gradient of the network output at ``x`` in role-block order."""
    return model.jacobian(x)


def mlp_backward(model: ShallowMLP, x) -> np.ndarray:
    return model.jacobian(x)
