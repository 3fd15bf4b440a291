"""scikit-learn compatible wrappers around gradient-descent training."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .activations import Activation
from .architectures import ImageModelSpec, build_image_model
from .initialization import InitSpec, ShallowArch, init_model
from .training import Dataset, TrainConfig, train_gd


def _check_scalar_input(X):
    X = check_array(X, dtype=np.float64)
    if X.shape[1] != 1:
        raise ValueError(f"shallow networks take one input feature, got {X.shape[1]}")
    return X


class _GDRegressor(RegressorMixin, BaseEstimator):
    def _build(self, n_features: int, n_outputs: int):
        raise NotImplementedError

    def _config(self) -> TrainConfig:
        return TrainConfig(learning_rate=self.learning_rate, epochs=self.epochs, seed=self.seed,
                           log_interval=self.log_interval, weight_decay=self.weight_decay)

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64, multi_output=True, y_numeric=True)
        Y = y.reshape(len(y), -1)
        self.n_features_in_ = X.shape[1]
        self._single_output = y.ndim == 1
        model = self._build(X.shape[1], Y.shape[1])
        self.model_, self.trace_ = train_gd(model, Dataset(X, Y), self._config())
        return self

    def predict(self, X):
        check_is_fitted(self, "model_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        out = np.asarray(self.model_.forward(X)).reshape(X.shape[0], -1)
        return out[:, 0] if self._single_output else out


class ZeNNRegressor(_GDRegressor):
    """Shallow ZeNN on a scalar input, trained by full-batch gradient descent.

    Weights start unit normal and biases at zero, drawn from ``seed``.
    """

    def __init__(self, n_neurons=64, alpha=1.1, activation="sine", learning_rate=0.25, epochs=1000,
                 weight_decay=0.0, log_interval=100, seed=0):
        self.n_neurons = n_neurons
        self.alpha = alpha
        self.activation = activation
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.weight_decay = weight_decay
        self.log_interval = log_interval
        self.seed = seed

    def _build(self, n_features, n_outputs):
        _check_scalar_input(np.zeros((1, n_features)))
        if n_outputs != 1:
            raise ValueError("shallow networks have a single output")
        arch = ShallowArch("zenn", self.n_neurons, Activation.parse(self.activation), alpha=self.alpha)
        return init_model(arch, InitSpec(seed=self.seed))


class ShallowMLPRegressor(_GDRegressor):
    """Averaged shallow MLP ``N**-beta * sum_j (w2 sigma(w1 x + b1) + b2)``."""

    def __init__(self, n_neurons=128, beta=0.5, activation="sine", learning_rate=0.25, epochs=1000,
                 weight_decay=0.0, log_interval=100, seed=0):
        self.n_neurons = n_neurons
        self.beta = beta
        self.activation = activation
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.weight_decay = weight_decay
        self.log_interval = log_interval
        self.seed = seed

    def _build(self, n_features, n_outputs):
        _check_scalar_input(np.zeros((1, n_features)))
        if n_outputs != 1:
            raise ValueError("shallow networks have a single output")
        arch = ShallowArch("mlp", self.n_neurons, Activation.parse(self.activation), beta=self.beta)
        return init_model(arch, InitSpec(seed=self.seed))


class DeepRegressor(_GDRegressor):
    """Coordinate network with a selectable first layer; see :mod:`zenn.architectures`."""

    def __init__(self, variant="randozenn", n=64, m=512, alpha=0.0, rho=10.0, mlp_units=1024, hidden=64,
                 depth=3, learning_rate=1e-5, epochs=1000, weight_decay=0.0, log_interval=100, seed=0):
        self.variant = variant
        self.n = n
        self.m = m
        self.alpha = alpha
        self.rho = rho
        self.mlp_units = mlp_units
        self.hidden = hidden
        self.depth = depth
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.weight_decay = weight_decay
        self.log_interval = log_interval
        self.seed = seed

    def _build(self, n_features, n_outputs):
        spec = ImageModelSpec(variant=self.variant, n=self.n, m=self.m, alpha=self.alpha, rho=self.rho,
                              mlp_units=self.mlp_units, hidden=self.hidden, depth=self.depth,
                              input_dim=n_features, output_dim=n_outputs, seed=self.seed)
        return build_image_model(spec)


class ZeNNFeatures(TransformerMixin, BaseEstimator):
    """Random frequency features ``j**-alpha * sigma(w1_j * j * x + b1_j)``, ``j = 1..N``.

    The inner weights are drawn unit normal at ``fit``; a linear model on top
    of these features is a ZeNN with frozen inner layer.
    """

    def __init__(self, n_neurons=64, alpha=1.1, activation="sine", bias_scale=0.0, seed=0):
        self.n_neurons = n_neurons
        self.alpha = alpha
        self.activation = activation
        self.bias_scale = bias_scale
        self.seed = seed

    def fit(self, X, y=None):
        X = _check_scalar_input(X)
        if self.n_neurons < 1:
            raise ValueError("n_neurons must be positive")
        self.n_features_in_ = X.shape[1]
        rng_w, rng_b = (np.random.default_rng(s) for s in np.random.SeedSequence(self.seed).spawn(2))
        self.w1_ = rng_w.normal(size=self.n_neurons)
        self.b1_ = self.bias_scale * rng_b.normal(size=self.n_neurons) if self.bias_scale else np.zeros(self.n_neurons)
        return self

    def transform(self, X):
        check_is_fitted(self, "w1_")
        x = _check_scalar_input(X)[:, 0]
        j = np.arange(1, self.n_neurons + 1, dtype=np.float64)
        act = Activation.parse(self.activation)
        return j ** (-self.alpha) * act(self.w1_ * j * x[:, None] + self.b1_)

    def get_feature_names_out(self, input_features=None):
        return np.array([f"zenn{j}" for j in range(1, self.n_neurons + 1)], dtype=object)
