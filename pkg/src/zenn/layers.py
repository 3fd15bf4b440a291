"""Layer types for deep models.

Every layer maps a batch ``X`` of shape ``(n, input_dim)`` to ``(n, output_dim)``.
``forward`` returns the output together with a cache that ``backward`` consumes;
``backward`` returns one gradient array per trainable parameter (in
``trainable_names`` order) plus the gradient with respect to ``X``.

Frequency indices are 1-based in the formulas and 0-based in storage, so a
stored index ``k`` stands for the frequency factor ``k + 1``.
"""
from __future__ import annotations

import copy
from typing import Sequence

import numpy as np

from .activations import Activation
from .exceptions import DimensionError

TWO_PI = 2.0 * np.pi


def _check_input(layer, X):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != layer.input_dim:
        raise DimensionError(
            f"{type(layer).__name__} expects inputs of dimension {layer.input_dim}, got shape {X.shape}"
        )
    return X


class Layer:
    """Base class. Subclasses declare ``param_names`` and a ``shapes`` mapping."""

    kind = "layer"
    param_names: tuple[str, ...] = ()

    def __init__(self, input_dim: int, output_dim: int, params: dict):
        self.input_dim = int(input_dim)
        self.output_dim = int(output_dim)
        shapes = self.param_shapes()
        self.params = {}
        for name in self.param_names:
            value = params.get(name)
            arr = np.zeros(shapes[name]) if value is None else np.array(value, dtype=np.float64)
            if arr.shape != shapes[name]:
                raise DimensionError(f"{type(self).__name__}.{name} has shape {arr.shape}, expected {shapes[name]}")
            arr.setflags(write=False)
            self.params[name] = arr

    @property
    def trainable_names(self) -> tuple[str, ...]:
        return self.param_names

    def param_shapes(self) -> dict:
        raise NotImplementedError

    @property
    def n_params(self) -> int:
        return sum(self.params[k].size for k in self.trainable_names)

    def parameters(self) -> np.ndarray:
        if not self.trainable_names:
            return np.zeros(0)
        return np.concatenate([self.params[k].ravel() for k in self.trainable_names])

    def with_params(self, **params) -> "Layer":
        new = copy.copy(self)
        new.params = dict(self.params)
        shapes = self.param_shapes()
        for name, value in params.items():
            arr = np.array(value, dtype=np.float64).reshape(shapes[name])
            arr.setflags(write=False)
            new.params[name] = arr
        return new

    def with_parameters(self, theta) -> "Layer":
        theta = np.asarray(theta, dtype=np.float64).reshape(-1)
        if theta.size != self.n_params:
            raise DimensionError(f"expected {self.n_params} parameters, got {theta.size}")
        updates, offset = {}, 0
        for name in self.trainable_names:
            size = self.params[name].size
            updates[name] = theta[offset:offset + size]
            offset += size
        return self.with_params(**updates)

    def hyper(self) -> dict:
        """Architecture descriptor, excluding parameter arrays."""
        return {}

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return (
            self.hyper() == other.hyper()
            and self.params.keys() == other.params.keys()
            and all(np.array_equal(self.params[k], other.params[k]) for k in self.params)
        )

    __hash__ = None

    def __call__(self, X):
        return self.forward(X)[0]

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.hyper().items() if k != "index")
        return f"{type(self).__name__}({args})"


class _Activated(Layer):
    """Layers of the form ``out = scale * sigma(U)``."""

    def __init__(self, input_dim, output_dim, activation, params):
        self.activation = Activation.parse(activation)
        super().__init__(input_dim, output_dim, params)

    def _scale(self) -> np.ndarray:
        raise NotImplementedError

    def _pre(self, X) -> np.ndarray:
        raise NotImplementedError

    def forward(self, X):
        X = _check_input(self, X)
        U = self._pre(X)
        S, dS = self.activation.value_and_derivative(U)
        scale = self._scale()
        return scale * S, (X, scale * dS)

    def backward(self, cache, G):
        X, scaled_ds = cache
        G = np.asarray(G, dtype=np.float64).reshape(X.shape[0], self.output_dim)
        return self._pre_backward(X, G * scaled_ds)


class Dense(_Activated):
    """Fully connected layer with optional unit weighting ``k**-alpha``.

    ``alpha = 0`` gives an ordinary dense layer; ``alpha > 0`` is the
    convergent-factor MLP layer.
    """

    kind = "dense"
    param_names = ("W", "b")

    def __init__(self, input_dim, output_dim, activation="relu", alpha=0.0, W=None, b=None):
        if alpha < 0:
            raise ValueError("alpha must be non-negative")
        self.alpha = float(alpha)
        super().__init__(input_dim, output_dim, activation, {"W": W, "b": b})

    def param_shapes(self):
        return {"W": (self.input_dim, self.output_dim), "b": (self.output_dim,)}

    def hyper(self):
        return {"input_dim": self.input_dim, "output_dim": self.output_dim,
                "activation": self.activation.value, "alpha": self.alpha}

    def _scale(self):
        if self.alpha == 0.0:
            return np.ones(self.output_dim)
        return np.arange(1, self.output_dim + 1, dtype=np.float64) ** (-self.alpha)

    def _pre(self, X):
        return X @ self.params["W"] + self.params["b"]

    def _pre_backward(self, X, GU):
        return [X.T @ GU, GU.sum(axis=0)], GU @ self.params["W"].T


class OZeNN(_Activated):
    """Full frequency lattice layer over ``{1..N}**d``.

    Output entry for the multi-index ``(j_1, ..., j_d)`` is
    ``prod(j_i)**-alpha * sigma(sum_i W[i, j_i] * j_i * x_i + b[i, j_i])``;
    entries are flattened in row-major order, so the last coordinate varies fastest.
    """

    kind = "ozenn"
    param_names = ("W", "b")

    def __init__(self, d, n, activation="sine", alpha=0.0, W=None, b=None):
        if alpha < 0:
            raise ValueError("alpha must be non-negative")
        self.n, self.alpha = int(n), float(alpha)
        grid = np.indices((self.n,) * int(d)).reshape(int(d), -1).T
        self._idx = grid
        self._freq = (grid + 1).astype(np.float64)
        super().__init__(d, self.n ** int(d), activation, {"W": W, "b": b})

    def param_shapes(self):
        return {"W": (self.input_dim, self.n), "b": (self.input_dim, self.n)}

    def hyper(self):
        return {"d": self.input_dim, "n": self.n, "activation": self.activation.value, "alpha": self.alpha}

    def _scale(self):
        return self._freq.prod(axis=1) ** (-self.alpha)

    def _pre(self, X):
        W, b = self.params["W"], self.params["b"]
        U = np.zeros((X.shape[0], self.output_dim))
        for i in range(self.input_dim):
            k = self._idx[:, i]
            U += X[:, i:i + 1] * (W[i, k] * self._freq[:, i]) + b[i, k]
        return U

    def _pre_backward(self, X, GU):
        W = self.params["W"]
        dW = np.empty_like(W)
        db = np.empty_like(W)
        dX = np.empty_like(X)
        col = GU.sum(axis=0)
        for i in range(self.input_dim):
            k = self._idx[:, i]
            f = self._freq[:, i]
            dW[i] = np.bincount(k, weights=(X[:, i] @ GU) * f, minlength=self.n)
            db[i] = np.bincount(k, weights=col, minlength=self.n)
            dX[:, i] = GU @ (W[i, k] * f)
        return [dW, db], dX


class RadZeNN(_Activated):
    """Diagonal of the frequency lattice: ``j**-alpha * sigma(sum_i W[i, j] * j * x_i + b[j])``."""

    kind = "radzenn"
    param_names = ("W", "b")

    def __init__(self, d, n, activation="sine", alpha=0.0, W=None, b=None):
        if alpha < 0:
            raise ValueError("alpha must be non-negative")
        self.n, self.alpha = int(n), float(alpha)
        self._j = np.arange(1, self.n + 1, dtype=np.float64)
        super().__init__(d, self.n, activation, {"W": W, "b": b})

    def param_shapes(self):
        return {"W": (self.input_dim, self.n), "b": (self.n,)}

    def hyper(self):
        return {"d": self.input_dim, "n": self.n, "activation": self.activation.value, "alpha": self.alpha}

    def _scale(self):
        return self._j ** (-self.alpha)

    def _pre(self, X):
        return (X @ self.params["W"]) * self._j + self.params["b"]

    def _pre_backward(self, X, GU):
        GJ = GU * self._j
        return [X.T @ GJ, GU.sum(axis=0)], GJ @ self.params["W"].T


class RandoZeNN(_Activated):
    """Random subsample of ``M`` lattice points.

    Output ``r`` is ``prod_i J[r, i]**-alpha * sigma(sum_i J[r, i] * x_i * W[r, i] + b[r])``
    where ``J`` is an ``M x d`` matrix with entries in ``{1..N}``.
    """

    kind = "randozenn"
    param_names = ("W", "b")

    def __init__(self, d, n, m, index, activation="sine", alpha=0.0, W=None, b=None):
        if alpha < 0:
            raise ValueError("alpha must be non-negative")
        self.n, self.m, self.alpha = int(n), int(m), float(alpha)
        index = np.array(index, dtype=np.int64)
        if index.shape != (self.m, int(d)):
            raise DimensionError(f"index matrix has shape {index.shape}, expected {(self.m, int(d))}")
        if index.min() < 1 or index.max() > self.n:
            raise ValueError(f"index entries must lie in 1..{self.n}")
        index.setflags(write=False)
        self.index = index
        self._freq = index.astype(np.float64)
        super().__init__(d, self.m, activation, {"W": W, "b": b})

    @staticmethod
    def sample_index(d: int, n: int, m: int, seed) -> np.ndarray:
        """I.i.d. uniform draws from ``{1..n}**d`` with replacement."""
        rng = np.random.default_rng(seed)
        return rng.integers(1, n + 1, size=(m, d), dtype=np.int64)

    @classmethod
    def sample(cls, d, n, m, seed, activation="sine", alpha=0.0, W=None, b=None):
        return cls(d, n, m, cls.sample_index(d, n, m, seed), activation, alpha, W, b)

    def param_shapes(self):
        return {"W": (self.m, self.input_dim), "b": (self.m,)}

    def hyper(self):
        return {"d": self.input_dim, "n": self.n, "m": self.m, "activation": self.activation.value,
                "alpha": self.alpha, "index": self.index.tolist()}

    def _scale(self):
        return self._freq.prod(axis=1) ** (-self.alpha)

    def _pre(self, X):
        return X @ (self._freq * self.params["W"]).T + self.params["b"]

    def _pre_backward(self, X, GU):
        dW = (GU.T @ X) * self._freq
        dX = GU @ (self._freq * self.params["W"])
        return [dW, GU.sum(axis=0)], dX


class FourierFeatures(Layer):
    """``x -> [sin(2 pi B x), cos(2 pi B x)]`` with ``B`` of shape ``(N, d)``."""

    kind = "fourier"
    param_names = ("B",)

    def __init__(self, d, n, rho=10.0, trainable=False, B=None):
        self.n, self.rho, self.trainable = int(n), float(rho), bool(trainable)
        super().__init__(d, 2 * self.n, {"B": B})

    @staticmethod
    def sample_frequencies(d: int, n: int, rho: float, seed) -> np.ndarray:
        rng = np.random.default_rng(seed)
        return rng.normal(0.0, rho, size=(n, d))

    @classmethod
    def sample(cls, d, n, rho, seed, trainable=False):
        return cls(d, n, rho, trainable, cls.sample_frequencies(d, n, rho, seed))

    @property
    def trainable_names(self):
        return ("B",) if self.trainable else ()

    def param_shapes(self):
        return {"B": (self.n, self.input_dim)}

    def hyper(self):
        return {"d": self.input_dim, "n": self.n, "rho": self.rho, "trainable": self.trainable}

    def forward(self, X):
        X = _check_input(self, X)
        P = TWO_PI * (X @ self.params["B"].T)
        S, C = np.sin(P), np.cos(P)
        return np.concatenate([S, C], axis=1), (X, S, C)

    def backward(self, cache, G):
        X, S, C = cache
        G = np.asarray(G, dtype=np.float64).reshape(X.shape[0], self.output_dim)
        GP = TWO_PI * (G[:, :self.n] * C - G[:, self.n:] * S)
        dX = GP @ self.params["B"]
        grads = [GP.T @ X] if self.trainable else []
        return grads, dX


class KAZeNNEdge(Layer):
    """Kolmogorov-Arnold layer whose edge functions are shallow scalar ZeNNs.

    ``out_q = sum_p f_qp(x_p)`` where ``f_qp`` is a ZeNN of width ``n``. Edge
    parameters are stored as arrays of shape ``(output_dim, input_dim, n)``.
    """

    kind = "kazenn"
    param_names = ("w1", "b1", "w2", "b2")

    def __init__(self, input_dim, output_dim, n, activation="sine", alpha=1.1,
                 w1=None, b1=None, w2=None, b2=None):
        if not alpha > 0:
            raise ValueError("alpha must be positive")
        self.n, self.alpha = int(n), float(alpha)
        self.activation = Activation.parse(activation)
        self._j = np.arange(1, self.n + 1, dtype=np.float64)
        super().__init__(input_dim, output_dim, {"w1": w1, "b1": b1, "w2": w2, "b2": b2})

    def param_shapes(self):
        shape = (self.output_dim, self.input_dim, self.n)
        return dict.fromkeys(self.param_names, shape)

    def hyper(self):
        return {"input_dim": self.input_dim, "output_dim": self.output_dim, "n": self.n,
                "activation": self.activation.value, "alpha": self.alpha}

    def edge(self, q: int, p: int):
        """The ZeNN on the edge from input ``p`` to output ``q`` (0-based)."""
        from .networks import ShallowZeNN

        P = self.params
        return ShallowZeNN(P["w1"][q, p], P["b1"][q, p], P["w2"][q, p], P["b2"][q, p],
                           self.activation, alpha=self.alpha)

    def forward(self, X):
        X = _check_input(self, X)
        P = self.params
        decay = self._j ** (-self.alpha)
        # U[n, q, p, j]
        U = P["w1"] * self._j * X[:, None, :, None] + P["b1"]
        S, dS = self.activation.value_and_derivative(U)
        out = (decay * (P["w2"] * S + P["b2"])).sum(axis=(2, 3))
        return out, (X, S, dS)

    def backward(self, cache, G):
        X, S, dS = cache
        P = self.params
        G = np.asarray(G, dtype=np.float64).reshape(X.shape[0], self.output_dim)
        decay = self._j ** (-self.alpha)
        Gq = G[:, :, None, None]
        GU = Gq * decay * P["w2"] * dS
        d_b1 = GU.sum(axis=0)
        d_w1 = (GU * X[:, None, :, None]).sum(axis=0) * self._j
        d_w2 = (Gq * decay * S).sum(axis=0)
        d_b2 = np.broadcast_to(G.sum(axis=0)[:, None, None] * decay, d_w2.shape).copy()
        dX = (GU * P["w1"] * self._j).sum(axis=(1, 3))
        return [d_w1, d_b1, d_w2, d_b2], dX


class Concat(Layer):
    """Applies several layers to the same input and concatenates their outputs."""

    kind = "concat"

    def __init__(self, layers: Sequence[Layer]):
        layers = list(layers)
        if not layers:
            raise ValueError("Concat needs at least one branch")
        d = layers[0].input_dim
        if any(layer.input_dim != d for layer in layers):
            raise DimensionError("all Concat branches must share the same input dimension")
        self.layers = layers
        self.input_dim = d
        self.output_dim = sum(layer.output_dim for layer in layers)
        self.params = {}

    @property
    def trainable_names(self):
        return ()

    @property
    def n_params(self):
        return sum(layer.n_params for layer in self.layers)

    def parameters(self):
        return np.concatenate([layer.parameters() for layer in self.layers])

    def with_parameters(self, theta):
        theta = np.asarray(theta, dtype=np.float64).reshape(-1)
        if theta.size != self.n_params:
            raise DimensionError(f"expected {self.n_params} parameters, got {theta.size}")
        parts, offset = [], 0
        for layer in self.layers:
            parts.append(layer.with_parameters(theta[offset:offset + layer.n_params]))
            offset += layer.n_params
        return Concat(parts)

    def hyper(self):
        return {"branches": [(layer.kind, layer.hyper()) for layer in self.layers]}

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return len(self.layers) == len(other.layers) and all(a == b for a, b in zip(self.layers, other.layers))

    def forward(self, X):
        X = _check_input(self, X)
        outs, caches = zip(*(layer.forward(X) for layer in self.layers))
        return np.concatenate(outs, axis=1), caches

    def backward(self, caches, G):
        G = np.asarray(G, dtype=np.float64)
        grads, dX, start = [], 0.0, 0
        for layer, cache in zip(self.layers, caches):
            stop = start + layer.output_dim
            g, dx = layer.backward(cache, G[:, start:stop])
            grads.extend(g)
            dX = dX + dx
            start = stop
        return grads, dX


def layer_forward(layer: Layer, x) -> np.ndarray:
    """Evaluate a layer on one input vector or on a batch of rows."""
    x = np.asarray(x, dtype=np.float64)
    out = layer.forward(x)[0]
    return out[0] if x.ndim == 1 else out


def layer_backward(layer: Layer, x, upstream) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(flat parameter gradient, input gradient)`` for ``sum(upstream * layer(x))``."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    out, cache = layer.forward(x)
    upstream = np.asarray(upstream, dtype=np.float64)
    if upstream.size != out.size:
        raise DimensionError(f"upstream gradient has {upstream.size} entries, expected {out.size}")
    grads, dX = layer.backward(cache, upstream.reshape(out.shape))
    flat = np.concatenate([np.ravel(g) for g in grads]) if grads else np.zeros(0)
    return flat, (dX[0] if single else dX)
