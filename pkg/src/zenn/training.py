"""Half-sum-of-squares loss, full-batch gradient descent and regression metrics."""
from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .exceptions import DimensionError, TrainingDivergedError

TRACE_HEADER = ("epoch", "train_mse", "val_mse", "psnr", "wall_time_s")


@dataclass(frozen=True, eq=False)
class Dataset:
    """Inputs ``X`` of shape ``(n, d_in)``, targets ``Y`` of shape ``(n, d_out)``.

    ``is_train`` marks the training split; every other sample is validation.
    """

    X: np.ndarray
    Y: np.ndarray
    is_train: Optional[np.ndarray] = None

    def __post_init__(self):
        X = np.array(self.X, dtype=np.float64)
        Y = np.array(self.Y, dtype=np.float64)
        if X.ndim == 1:
            X = X[:, None]
        if Y.ndim == 1:
            Y = Y[:, None]
        if X.shape[0] != Y.shape[0]:
            raise DimensionError(f"{X.shape[0]} inputs but {Y.shape[0]} targets")
        mask = np.ones(X.shape[0], bool) if self.is_train is None else np.array(self.is_train, dtype=bool)
        if mask.shape != (X.shape[0],):
            raise DimensionError("split labels must have one entry per sample")
        for arr in (X, Y, mask):
            arr.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)
        object.__setattr__(self, "is_train", mask)

    def __len__(self):
        return self.X.shape[0]

    @property
    def split(self) -> list[str]:
        return ["train" if t else "validation" for t in self.is_train]

    def with_split(self, is_train) -> "Dataset":
        return Dataset(self.X, self.Y, is_train)

    def train(self) -> tuple[np.ndarray, np.ndarray]:
        return self.X[self.is_train], self.Y[self.is_train]

    def validation(self) -> tuple[np.ndarray, np.ndarray]:
        return self.X[~self.is_train], self.Y[~self.is_train]


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.25
    epochs: int = 1000
    seed: int = 0
    log_interval: int = 100
    weight_decay: float = 0.0
    psnr: bool = False
    record_wall_time: bool = False

    def __post_init__(self):
        if not self.learning_rate >= 0:
            raise ValueError("learning_rate must be non-negative")
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")
        if self.log_interval < 1:
            raise ValueError("log_interval must be a positive integer")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be non-negative")


@dataclass(frozen=True)
class TraceRecord:
    epoch: int
    train_mse: float
    val_mse: Optional[float]
    psnr: Optional[float]
    wall_time: Optional[float]


@dataclass
class TrainTrace:
    records: list = field(default_factory=list)

    def append(self, record: TraceRecord):
        if self.records and record.epoch <= self.records[-1].epoch:
            raise ValueError("trace epochs must be strictly increasing")
        self.records.append(record)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, i):
        return self.records[i]

    @property
    def epochs(self) -> np.ndarray:
        return np.array([r.epoch for r in self.records])

    @property
    def train_mse(self) -> np.ndarray:
        return np.array([r.train_mse for r in self.records])

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(TRACE_HEADER)
        for r in self.records:
            writer.writerow([r.epoch, _cell(r.train_mse), _cell(r.val_mse), _cell(r.psnr), _cell(r.wall_time)])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        return text


def _cell(value) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    return repr(float(value))


def _predict(model, X) -> np.ndarray:
    return np.asarray(model.forward(X), dtype=np.float64).reshape(X.shape[0], -1)


def loss(model, dataset: Dataset) -> float:
    """``0.5 * sum((F(X) - Y)**2)`` over the training split and all outputs."""
    X, Y = dataset.train()
    if X.shape[0] == 0:
        raise ValueError("the training split is empty")
    E = _predict(model, X) - Y
    return 0.5 * float(np.sum(E * E))


def loss_gradient(model, X, Y) -> tuple[float, np.ndarray]:
    E = _predict(model, X) - Y
    return 0.5 * float(np.sum(E * E)), model.vjp(X, E)


def mse(pred, truth) -> float:
    pred = np.asarray(pred, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if pred.shape != truth.shape:
        raise DimensionError(f"shape mismatch: {pred.shape} vs {truth.shape}")
    if pred.size == 0:
        raise ValueError("mse of empty input")
    return float(np.mean((pred - truth) ** 2))


def psnr(pred, truth, max_value: float = 1.0) -> float:
    """Peak signal-to-noise ratio in dB; identical inputs give ``inf``."""
    err = mse(pred, truth)
    if err == 0.0:
        return math.inf
    return 10.0 * math.log10(max_value ** 2 / err)


def _record(model, dataset, epoch, config, train_pred, t0) -> TraceRecord:
    _, Ytr = dataset.train()
    Xv, Yv = dataset.validation()
    train_mse = mse(train_pred, Ytr)
    val_mse = score = None
    if Xv.shape[0]:
        val_pred = _predict(model, Xv)
        val_mse = mse(val_pred, Yv)
        if config.psnr:
            score = psnr(val_pred, Yv)
    elif config.psnr:
        score = psnr(train_pred, Ytr)
    wall = time.perf_counter() - t0 if config.record_wall_time else None
    return TraceRecord(epoch, train_mse, val_mse, score, wall)


def train_gd(model, dataset: Dataset, config: TrainConfig, callback=None):
    """Run exactly ``config.epochs`` full-batch updates ``theta -= lr * grad``.

    Returns ``(trained_model, trace)``. The trace holds the initial state,
    every ``log_interval``-th epoch and the final epoch. Raises
    ``TrainingDivergedError`` as soon as the loss is non-finite.
    """
    X, Y = dataset.train()
    if X.shape[0] == 0:
        raise ValueError("the training split is empty")
    # overflow on the way to divergence is reported by the guard below
    with np.errstate(over="ignore", invalid="ignore"):
        return _descend(model, dataset, config, callback, X, Y)


def _descend(model, dataset, config, callback, X, Y):
    trace = TrainTrace()
    theta = model.parameters()
    lr, wd = config.learning_rate, config.weight_decay
    t0 = time.perf_counter()
    current = model
    for epoch in range(config.epochs + 1):
        current = model.with_parameters(theta)
        pred, grad = current.residual_gradient(X, Y)
        pred = np.asarray(pred, dtype=np.float64).reshape(Y.shape)
        E = pred - Y
        value = 0.5 * float(np.sum(E * E))
        if wd:
            value += 0.5 * wd * float(theta @ theta)
        if not math.isfinite(value):
            raise TrainingDivergedError(epoch, trace)
        if epoch % config.log_interval == 0 or epoch == config.epochs:
            trace.append(_record(current, dataset, epoch, config, pred, t0))
            if callback is not None:
                callback(trace.records[-1])
        if epoch == config.epochs:
            break
        if wd:
            grad = grad + wd * theta
        theta = theta - lr * grad
    return current, trace


def residual_evolution_check(model, dataset: Dataset, probe_x, eta: float) -> tuple[float, float]:
    """Compare the kernel prediction of one GD step with the actual output change.

    Returns ``(predicted, actual)`` where ``predicted = -eta * sum_mu K(probe, X_mu) E_mu``
    and ``actual`` is the change of the output at ``probe_x`` after one step of size ``eta``.
    The two agree up to ``O(eta**2)``.
    """
    from .kernel import tangent_kernel

    X, Y = dataset.train()
    probe = np.asarray(probe_x, dtype=np.float64).reshape(1, -1)
    E = (_predict(model, X) - Y).reshape(-1)
    K = tangent_kernel(model, probe, X).reshape(-1)
    predicted = -eta * float(K @ E)
    grad = model.vjp(X, E.reshape(-1, 1))
    stepped = model.with_parameters(model.parameters() - eta * grad)
    actual = float(_predict(stepped, probe)[0, 0] - _predict(model, probe)[0, 0])
    return predicted, actual
