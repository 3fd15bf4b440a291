"""Tangent kernels of shallow ZeNNs and their spectral diagnostics."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .networks import ShallowZeNN


def zentk_eval(model: ShallowZeNN, x, y):
    """Closed-form tangent kernel ``K(x, y) = <grad_theta f(x), grad_theta f(y)>``.

    ``x`` and ``y`` broadcast against each other.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    sx, dsx = model.activation.value_and_derivative(model.preactivation(x))
    sy, dsy = model.activation.value_and_derivative(model.preactivation(y))
    j = model.index
    w2sq = model.w2 * model.w2
    dd = dsx * dsy
    freq_term = (w2sq * j ** (2.0 - 2.0 * model.alpha) * dd).sum(axis=-1)
    base_term = (j ** (-2.0 * model.alpha) * (1.0 + sx * sy + w2sq * dd)).sum(axis=-1)
    out = (x * y) * freq_term + base_term
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class KernelMatrix:
    entries: np.ndarray
    points: np.ndarray

    def __post_init__(self):
        entries = np.array(self.entries, dtype=np.float64)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError("kernel matrix must be square")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "points", np.asarray(self.points, dtype=np.float64))

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return jacobi_eigenvalues(self.entries)

    def smallest_eigenvalue(self) -> float:
        return smallest_eigenvalue(self)

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        pts = self.points.reshape(self.size, -1)
        labels = [" ".join(repr(float(v)) for v in p) for p in pts]
        writer.writerow(["point"] + labels)
        for label, row in zip(labels, self.entries):
            writer.writerow([label] + [repr(float(v)) for v in row])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        return text


def zentk_gram(model: ShallowZeNN, points: Sequence[float]) -> KernelMatrix:
    """Pairwise kernel over ``points``; the lower triangle mirrors the upper one exactly."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1)
    if pts.size == 0:
        raise ValueError("need at least one point")
    n = pts.size
    iu, ju = np.triu_indices(n)
    K = np.empty((n, n))
    K[iu, ju] = zentk_eval(model, pts[iu], pts[ju])
    K[ju, iu] = K[iu, ju]
    return KernelMatrix(K, pts)


def _jacobians(model, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if hasattr(model, "jacobian"):
        return model.jacobian(X.reshape(-1))
    if model.n_outputs != 1:
        raise ValueError("empirical tangent kernels are defined here for scalar-output models only")
    one = np.ones((1, 1))
    return np.stack([model.vjp(X[i:i + 1], one) for i in range(X.shape[0])])


def tangent_kernel(model, X1, X2) -> np.ndarray:
    """Kernel matrix between two input batches.

    Shallow ZeNNs use the closed form; other models use the Jacobian inner
    product assembled from their backward pass.
    """
    if isinstance(model, ShallowZeNN):
        a = np.asarray(X1, dtype=np.float64).reshape(-1)
        b = np.asarray(X2, dtype=np.float64).reshape(-1)
        return zentk_eval(model, a[:, None], b[None, :]).reshape(a.size, b.size)
    return _jacobians(model, X1) @ _jacobians(model, X2).T


def empirical_gram(model, X) -> KernelMatrix:
    J = _jacobians(model, X)
    K = J @ J.T
    K = 0.5 * (K + K.T)
    return KernelMatrix(K, np.asarray(X))


def _check_symmetric(A: np.ndarray, tol: float = 1e-12) -> None:
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix must be square")
    scale = max(1.0, float(np.max(np.abs(A)))) if A.size else 1.0
    if A.size and np.max(np.abs(A - A.T)) > tol * scale:
        raise ValueError("matrix is not symmetric within tolerance")


def jacobi_eigenvalues(A, tol: float = 1e-12, max_sweeps: int = 100) -> np.ndarray:
    """All eigenvalues of a symmetric matrix by cyclic Jacobi rotations, sorted ascending.

    Sweeps stop once the off-diagonal Frobenius norm falls below
    ``tol * max(1, ||A||_F)``.
    """
    A = np.array(A.entries if isinstance(A, KernelMatrix) else A, dtype=np.float64)
    _check_symmetric(A)
    n = A.shape[0]
    A = 0.5 * (A + A.T)
    threshold = tol * max(1.0, float(np.linalg.norm(A)))
    for _ in range(max_sweeps):
        off = float(np.linalg.norm(A - np.diag(np.diag(A))))
        if off < threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                h = A[q, q] - A[p, p]
                if abs(apq) < 1e-150 * abs(h):
                    t = apq / h  # theta**2 would overflow; t ~ 1 / (2 theta)
                else:
                    theta = h / (2.0 * apq)
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                col_p, col_q = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * col_p - s * col_q
                A[:, q] = s * col_p + c * col_q
                row_p, row_q = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * row_p - s * row_q
                A[q, :] = s * row_p + c * row_q
                A[p, q] = A[q, p] = 0.0
    else:
        raise RuntimeError("Jacobi iteration did not converge")
    return np.sort(np.diag(A))


def smallest_eigenvalue(K) -> float:
    return float(jacobi_eigenvalues(K)[0])


@dataclass(frozen=True)
class GronwallReport:
    times: np.ndarray
    losses: np.ndarray
    lambda_min: np.ndarray
    bound: np.ndarray
    margin: np.ndarray
    violations: np.ndarray

    @property
    def ok(self) -> bool:
        return self.violations.size == 0


def gronwall_diagnostic(losses, lambda_min, times, rtol: float = 1e-9) -> GronwallReport:
    """Compare a loss trajectory with ``L(0) * exp(-2 * integral of lambda_min)``.

    The integral uses the trapezoidal rule on ``times``. Steps where the
    discrete loss exceeds the continuous-flow bound are reported in
    ``violations``; large learning rates are expected to produce some.
    """
    L = np.asarray(losses, dtype=np.float64)
    lam = np.asarray(lambda_min, dtype=np.float64)
    t = np.asarray(times, dtype=np.float64)
    if not (L.shape == lam.shape == t.shape) or L.ndim != 1 or L.size == 0:
        raise ValueError("losses, lambda_min and times must be 1-D sequences of equal length")
    integral = np.concatenate([[0.0], np.cumsum(0.5 * (lam[1:] + lam[:-1]) * np.diff(t))])
    bound = L[0] * np.exp(-2.0 * integral)
    margin = bound - L
    violations = np.flatnonzero(L > bound * (1.0 + rtol) + 1e-300)
    return GronwallReport(t, L, lam, bound, margin, violations)


def gronwall_run(model: ShallowZeNN, dataset, eta: float, steps: int) -> GronwallReport:
    """Train with plain GD for ``steps`` updates, tracking loss and the smallest Gram eigenvalue."""
    from .training import loss_gradient

    X, Y = dataset.train()
    losses, lams = [], []
    theta = model.parameters()
    for k in range(steps + 1):
        current = model.with_parameters(theta)
        value, grad = loss_gradient(current, X, Y)
        losses.append(value)
        lams.append(smallest_eigenvalue(zentk_gram(current, X.reshape(-1))))
        theta = theta - eta * grad
    return gronwall_diagnostic(losses, lams, eta * np.arange(steps + 1))


def feature_probe(model: ShallowZeNN, j: int, x: float, y: float) -> float:
    """Second derivative of ``K(x, y)`` with respect to the outer weight of neuron ``j`` (1-based).

    Equals ``2 * j**(2 - 2 alpha) * (x y + j**-2) * sigma'(u_j(x)) * sigma'(u_j(y))``
    and does not depend on the width.
    """
    if not 1 <= int(j) <= model.n:
        raise IndexError(f"neuron index {j} outside 1..{model.n}")
    j = int(j)
    k = j - 1
    ux = model.w1[k] * j * x + model.b1[k]
    uy = model.w1[k] * j * y + model.b1[k]
    d = model.activation.derivative
    return float(2.0 * j ** (2.0 - 2.0 * model.alpha) * (x * y + j ** -2.0) * d(ux) * d(uy))
