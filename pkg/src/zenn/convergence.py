"""Width-doubling experiment for pointwise convergence of shallow networks."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .initialization import InitSpec, ShallowArch
from .networks import ROLES


@dataclass(frozen=True)
class TailReport:
    widths: np.ndarray
    seeds: tuple
    sup_diff: np.ndarray  # (n_seeds, n_widths): max over the grid of |f^{2N} - f^N|
    slopes: np.ndarray    # per-seed least-squares slope of log D against log N

    @property
    def log2_sup_diff(self) -> np.ndarray:
        return np.log2(np.maximum(self.sup_diff, np.finfo(float).tiny)).mean(axis=0)

    @property
    def slope(self) -> float:
        return float(self.slopes.mean())

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["N", "mean_sup_diff", "mean_log2_sup_diff", "max_sup_diff"])
        for k, n in enumerate(self.widths):
            col = self.sup_diff[:, k]
            writer.writerow([int(n), repr(float(col.mean())), repr(float(self.log2_sup_diff[k])),
                             repr(float(col.max()))])
        writer.writerow(["slope", repr(self.slope), "", ""])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        return text


def _sup_diffs(arch: ShallowArch, draws: dict, grid: np.ndarray, widths: Sequence[int]) -> np.ndarray:
    w1, b1, w2, b2 = (draws[r] for r in ROLES)
    x = grid[:, None]
    out = []
    if arch.kind == "zenn":
        for n in widths:
            j = np.arange(n + 1, 2 * n + 1, dtype=np.float64)
            sl = slice(n, 2 * n)
            tail = j ** (-arch.alpha) * (w2[sl] * arch.activation(w1[sl] * j * x + b1[sl]) + b2[sl])
            out.append(np.max(np.abs(tail.sum(axis=1))))
    else:
        terms = w2 * arch.activation(w1 * x + b1) + b2
        csum = np.cumsum(terms, axis=1)
        for n in widths:
            diff = (2 * n) ** (-arch.beta) * csum[:, 2 * n - 1] - float(n) ** (-arch.beta) * csum[:, n - 1]
            out.append(np.max(np.abs(diff)))
    return np.array(out)


def convergence_tail(arch: ShallowArch, widths: Sequence[int], grid, seeds: Sequence[int],
                     spec: InitSpec | None = None) -> TailReport:
    """``D(N) = max_x |f^{2N}(x) - f^N(x)|`` for nested networks, per seed.

    The width-``2N`` network extends the width-``N`` one: both come from the
    same role streams, so they share their first ``N`` neurons. ``arch.n`` is
    ignored; the widths come from ``widths``.
    """
    widths = np.asarray(list(widths), dtype=np.int64)
    if widths.size < 2 or np.any(np.diff(widths) <= 0) or widths[0] < 1:
        raise ValueError("widths must be an increasing sequence of positive integers")
    grid = np.asarray(grid, dtype=np.float64).reshape(-1)
    spec = InitSpec() if spec is None else spec
    seeds = tuple(int(s) for s in seeds)
    top = 2 * int(widths[-1])
    D = np.empty((len(seeds), widths.size))
    for i, seed in enumerate(seeds):
        draws = spec.sample_roles(top, seed=seed)
        D[i] = _sup_diffs(arch, draws, grid, widths)
    logn = np.log(widths)
    logd = np.log(np.maximum(D, np.finfo(float).tiny))
    slopes = np.array([np.polyfit(logn, row, 1)[0] for row in logd])
    return TailReport(widths, seeds, D, slopes)
