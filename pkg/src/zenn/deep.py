"""Sequential composition of layers.

The flat parameter vector of a ``DeepModel`` lists layers in order; within a
layer, trainable arrays follow ``trainable_names`` and each array is raveled
in C order. ``Concat`` layers list their branches in order.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .exceptions import DimensionError
from .layers import Layer


class DeepModel:
    def __init__(self, layers: Sequence[Layer]):
        layers = list(layers)
        if not layers:
            raise ValueError("a DeepModel needs at least one layer")
        for k, (a, b) in enumerate(zip(layers, layers[1:])):
            if a.output_dim != b.input_dim:
                raise DimensionError(
                    f"layer {k} outputs {a.output_dim} values but layer {k + 1} expects {b.input_dim}"
                )
        self.layers = layers

    @property
    def n_inputs(self) -> int:
        return self.layers[0].input_dim

    @property
    def n_outputs(self) -> int:
        return self.layers[-1].output_dim

    @property
    def n_params(self) -> int:
        return sum(layer.n_params for layer in self.layers)

    def parameters(self) -> np.ndarray:
        return np.concatenate([layer.parameters() for layer in self.layers])

    def with_parameters(self, theta) -> "DeepModel":
        theta = np.asarray(theta, dtype=np.float64).reshape(-1)
        if theta.size != self.n_params:
            raise DimensionError(f"expected {self.n_params} parameters, got {theta.size}")
        layers, offset = [], 0
        for layer in self.layers:
            layers.append(layer.with_parameters(theta[offset:offset + layer.n_params]))
            offset += layer.n_params
        return DeepModel(layers)

    def _forward(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        caches = []
        for layer in self.layers:
            X, cache = layer.forward(X)
            caches.append(cache)
        return X, caches

    def forward(self, X) -> np.ndarray:
        return self._forward(X)[0]

    __call__ = forward

    def vjp(self, X, upstream, return_input_grad=False):
        """Gradient of ``sum(upstream * forward(X))`` over the flat trainable parameters."""
        out, caches = self._forward(X)
        return self._backward(out, caches, upstream, return_input_grad)

    def residual_gradient(self, X, Y):
        """Predictions and the gradient of ``0.5 * sum((forward(X) - Y)**2)`` from one forward pass."""
        out, caches = self._forward(X)
        return out, self._backward(out, caches, out - np.asarray(Y, dtype=np.float64).reshape(out.shape))

    def _backward(self, out, caches, upstream, return_input_grad=False):
        G = np.asarray(upstream, dtype=np.float64)
        if G.size != out.size:
            raise DimensionError(f"upstream gradient has {G.size} entries, expected {out.size}")
        G = G.reshape(out.shape)
        grads = []
        for layer, cache in zip(reversed(self.layers), reversed(caches)):
            g, G = layer.backward(cache, G)
            grads.append([np.ravel(a) for a in g])
        flat = [a for g in reversed(grads) for a in g]
        theta_grad = np.concatenate(flat) if flat else np.zeros(0)
        return (theta_grad, G) if return_input_grad else theta_grad

    def __eq__(self, other):
        if not isinstance(other, DeepModel):
            return NotImplemented
        return len(self.layers) == len(other.layers) and all(a == b for a, b in zip(self.layers, other.layers))

    __hash__ = None

    def __repr__(self):
        return "DeepModel([" + ", ".join(map(repr, self.layers)) + "])"


def model_forward(model: DeepModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    out = model.forward(x)
    return out[0] if x.ndim == 1 else out


def model_backward(model: DeepModel, x, upstream) -> np.ndarray:
    return model.vjp(x, upstream)
