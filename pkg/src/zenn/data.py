"""Dataset generation and file ingestion for the regression experiments."""
from __future__ import annotations

import csv
import io
import math
import re
import warnings
from dataclasses import dataclass

import numpy as np

from .training import Dataset


class MissingColumnError(KeyError):
    pass


class PPMFormatError(ValueError):
    pass


def synth_target(x):
    """``x + 0.125 sin(10x) + 0.135 cos(5x) + 0.115 sin(50x)``."""
    x = np.asarray(x, dtype=np.float64)
    return x + 0.125 * np.sin(10 * x) + 0.135 * np.cos(5 * x) + 0.115 * np.sin(50 * x)


def synth1d(n_points: int = 200, x_range=(0.0, 2.0), seed: int = 0, noise_std: float = 0.0) -> Dataset:
    """Uniform samples of the three-tone synthetic target, with optional Gaussian noise."""
    lo, hi = map(float, x_range)
    if n_points < 1:
        raise ValueError("n_points must be at least 1")
    if not hi > lo:
        raise ValueError(f"empty x range ({lo}, {hi})")
    rng = np.random.default_rng(seed)
    x = rng.uniform(lo, hi, size=n_points)
    y = synth_target(x)
    if noise_std > 0:
        y = y + rng.normal(0.0, noise_std, size=n_points)
    return Dataset(x[:, None], y[:, None])


def _normalized_index(n: int) -> np.ndarray:
    return np.arange(n, dtype=np.float64) / (n - 1) if n > 1 else np.zeros(n)


def load_jena_csv(path, column: str = "T (degC)", max_rows: int = 3000) -> Dataset:
    """First ``max_rows`` values of ``column`` against their row index rescaled to [0, 1]."""
    values = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        if column not in header:
            raise MissingColumnError(f"{path}: column {column!r} not found in header")
        col = header.index(column)
        for line_no, row in enumerate(reader, start=2):
            if len(values) >= max_rows:
                break
            if not row:
                continue
            if len(row) != len(header):
                raise ValueError(f"{path}:{line_no}: expected {len(header)} fields, got {len(row)}")
            try:
                values.append(float(row[col]))
            except ValueError:
                raise ValueError(f"{path}:{line_no}: non-numeric value {row[col]!r}") from None
    if not values:
        raise ValueError(f"{path}: no data rows")
    if len(values) < max_rows:
        warnings.warn(f"{path}: only {len(values)} rows available, {max_rows} requested", stacklevel=2)
    y = np.asarray(values)
    return Dataset(_normalized_index(y.size)[:, None], y[:, None])


@dataclass(frozen=True, eq=False)
class ImageDataset(Dataset):
    """Pixels in row-major order: ``X = (column, row)`` normalized to [0, 1], ``Y`` = RGB in [0, 1]."""

    width: int = 0
    height: int = 0

    def __post_init__(self):
        super().__post_init__()
        if self.width < 1 or self.height < 1:
            raise ValueError("image dimensions must be positive")
        if len(self) != self.width * self.height:
            raise ValueError("pixel count does not match width * height")

    @classmethod
    def from_array(cls, rgb) -> "ImageDataset":
        rgb = np.asarray(rgb, dtype=np.float64)
        if rgb.ndim != 3 or rgb.shape[2] != 3:
            raise ValueError("expected an array of shape (height, width, 3)")
        h, w, _ = rgb.shape
        rows, cols = np.meshgrid(_normalized_index(h), _normalized_index(w), indexing="ij")
        X = np.stack([cols.ravel(), rows.ravel()], axis=1)
        return cls(X, rgb.reshape(-1, 3), None, width=w, height=h)

    def with_split(self, is_train) -> "ImageDataset":
        return ImageDataset(self.X, self.Y, is_train, width=self.width, height=self.height)

    def to_array(self, values=None) -> np.ndarray:
        values = self.Y if values is None else np.asarray(values, dtype=np.float64)
        return values.reshape(self.height, self.width, 3)


_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\S+)")


def _read_header(data: bytes):
    pos, tokens = 0, []
    for _ in range(4):
        m = _TOKEN.match(data, pos)
        if not m:
            raise PPMFormatError("truncated header")
        tokens.append(m.group(1))
        pos = m.end()
    return tokens, pos


def load_ppm(path) -> ImageDataset:
    """Read a binary P6 image with maxval 255."""
    with open(path, "rb") as fh:
        data = fh.read()
    if not data.startswith(b"P6"):
        raise PPMFormatError(f"{path}: wrong magic number {data[:2]!r}; expected b'P6'")
    tokens, pos = _read_header(data)
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise PPMFormatError(f"{path}: malformed header") from None
    if maxval != 255:
        raise PPMFormatError(f"{path}: maxval {maxval} is not supported; expected 255")
    if width < 1 or height < 1:
        raise PPMFormatError(f"{path}: invalid dimensions {width}x{height}")
    if pos >= len(data) or not data[pos:pos + 1].isspace():
        raise PPMFormatError(f"{path}: truncated header")
    payload = data[pos + 1:]
    need = width * height * 3
    if len(payload) < need:
        raise PPMFormatError(f"{path}: truncated payload ({len(payload)} of {need} bytes)")
    pixels = np.frombuffer(payload[:need], dtype=np.uint8).reshape(height, width, 3)
    return ImageDataset.from_array(pixels / 255.0)


def to_bytes(rgb) -> np.ndarray:
    return np.clip(np.rint(np.asarray(rgb, dtype=np.float64) * 255.0), 0, 255).astype(np.uint8)


def save_ppm(image, path) -> None:
    """Write an ``ImageDataset`` (or an ``(h, w, 3)`` array in [0, 1]) as P6."""
    rgb = image.to_array() if isinstance(image, ImageDataset) else np.asarray(image, dtype=np.float64)
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ValueError("expected an image of shape (height, width, 3)")
    h, w, _ = rgb.shape
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(to_bytes(rgb).tobytes())


def random_split(dataset: Dataset, train_fraction: float = 0.75, seed: int = 0) -> Dataset:
    """Label exactly ``floor(train_fraction * n)`` random samples as training data."""
    if not 0 < train_fraction < 1:
        raise ValueError("train_fraction must lie strictly between 0 and 1")
    n = len(dataset)
    n_train = math.floor(train_fraction * n + 1e-9)
    if n_train < 1 or n_train >= n:
        raise ValueError(f"cannot split {n} samples into non-empty train and validation parts")
    order = np.random.default_rng(seed).permutation(n)
    mask = np.zeros(n, dtype=bool)
    mask[order[:n_train]] = True
    return dataset.with_split(mask)


def dataset_to_csv(dataset: Dataset, path=None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    dx, dy = dataset.X.shape[1], dataset.Y.shape[1]
    xs = ["x"] if dx == 1 else [f"x{i + 1}" for i in range(dx)]
    ys = ["y"] if dy == 1 else [f"y{i + 1}" for i in range(dy)]
    writer.writerow(xs + ys + ["split"])
    for xr, yr, label in zip(dataset.X, dataset.Y, dataset.split):
        writer.writerow([repr(float(v)) for v in xr] + [repr(float(v)) for v in yr] + [label])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text
