"""Datasets: Friedman regression, Gaussian blobs, and MNIST-style IDX files."""

from __future__ import annotations

import gzip
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError, ValidationError

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


@dataclass
class Dataset:
    X: np.ndarray
    y: np.ndarray
    kind: str  # "regression" | "binary"
    name: str = "data"
    train_idx: np.ndarray | None = None
    test_idx: np.ndarray | None = None

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.X.ndim != 2 or self.y.shape != (self.X.shape[0],):
            raise DataError(f"X {self.X.shape} and y {self.y.shape} are inconsistent")
        if self.kind not in ("regression", "binary"):
            raise DataError(f"unknown dataset kind {self.kind!r}")
        if np.isnan(self.X).any() or np.isnan(self.y).any():
            raise DataError("dataset contains NaN")
        if self.kind == "binary" and not np.isin(self.y, (-1.0, 1.0)).all():
            raise DataError("binary labels must be -1 or +1")
        if self.train_idx is not None:
            both = np.concatenate([self.train_idx, self.test_idx])
            if len(both) != self.n or not np.array_equal(np.sort(both), np.arange(self.n)):
                raise DataError("train/test indices must partition the rows")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def is_split(self) -> bool:
        return self.train_idx is not None

    def train(self):
        if not self.is_split:
            return self.X, self.y
        return self.X[self.train_idx], self.y[self.train_idx]

    def test(self):
        if not self.is_split:
            return self.X[:0], self.y[:0]
        return self.X[self.test_idx], self.y[self.test_idx]


def friedman_function(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    return (
        10.0 * np.sin(np.pi * X[:, 0] * X[:, 1])
        + 20.0 * (X[:, 2] - 0.5) ** 2
        + 10.0 * X[:, 3]
        + 5.0 * X[:, 4]
    )


def gen_friedman(n: int, p: int = 10, sigma: float = 1.0, rng: np.random.Generator | None = None) -> Dataset:
    """Inputs i.i.d. U(0, 1); columns past the fifth do not enter the response."""
    if p < 5:
        raise ValidationError("Friedman data needs p >= 5")
    if n <= 0 or sigma < 0:
        raise ValidationError("need n > 0 and sigma >= 0")
    rng = rng if rng is not None else np.random.default_rng()
    X = rng.random((n, p))
    y = friedman_function(X)
    if sigma > 0:
        y = y + sigma * rng.standard_normal(n)
    return Dataset(X, y, "regression", name=f"friedman_p{p}")


def gen_blobs(n: int, rng: np.random.Generator, center: float = 2.0, sd: float = 0.5, dim: int = 2) -> Dataset:
    """Two isotropic Gaussian blobs at +center and -center (every coordinate), labels +1/-1."""
    y = np.where(rng.random(n) < 0.5, 1.0, -1.0)
    X = y[:, None] * center + sd * rng.standard_normal((n, dim))
    return Dataset(X, y, "binary", name="blobs")


def split_dataset(ds: Dataset, train_frac: float = 0.7, rng: np.random.Generator | None = None) -> Dataset:
    if not 0.0 < train_frac < 1.0:
        raise ValidationError("train_frac must lie in (0, 1)")
    n_train = int(round(train_frac * ds.n))
    if n_train == 0 or n_train == ds.n:
        raise DataError(f"split of {ds.n} rows at {train_frac} leaves one side empty")
    rng = rng if rng is not None else np.random.default_rng()
    perm = rng.permutation(ds.n)
    return Dataset(ds.X, ds.y, ds.kind, ds.name, np.sort(perm[:n_train]), np.sort(perm[n_train:]))


# -- IDX -----------------------------------------------------------------------

def _read_bytes(path) -> bytes:
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    opener = gzip.open if path.suffix == ".gz" else open
    with opener(path, "rb") as fh:
        return fh.read()


def _parse_idx(buf: bytes, magic: int, path) -> np.ndarray:
    if len(buf) < 4:
        raise DataError(f"{path}: truncated header")
    (got,) = struct.unpack(">I", buf[:4])
    if got != magic:
        raise DataError(f"{path}: bad magic 0x{got:08x}, expected 0x{magic:08x}")
    ndim = magic & 0xFF
    header = 4 + 4 * ndim
    if len(buf) < header:
        raise DataError(f"{path}: truncated header")
    dims = struct.unpack(f">{ndim}I", buf[4:header])
    size = int(np.prod(dims))
    if len(buf) - header < size:
        raise DataError(f"{path}: truncated data ({len(buf) - header} of {size} bytes)")
    return np.frombuffer(buf, dtype=np.uint8, count=size, offset=header).reshape(dims)


def load_idx(images_path, labels_path) -> tuple[np.ndarray, np.ndarray]:
    """Read an IDX image/label file pair (optionally gzipped).

    Returns ``(images, labels)`` as uint8 arrays of shapes ``(n, rows, cols)`` and ``(n,)``.
    """
    images = _parse_idx(_read_bytes(images_path), IDX_IMAGES_MAGIC, images_path)
    labels = _parse_idx(_read_bytes(labels_path), IDX_LABELS_MAGIC, labels_path)
    if images.shape[0] != labels.shape[0]:
        raise DataError(f"{images.shape[0]} images but {labels.shape[0]} labels")
    return images, labels


def filter_binary(images: np.ndarray, labels: np.ndarray, digit_a: int, digit_b: int, name=None) -> Dataset:
    """Keep two digits; flatten and scale pixels to [0, 1]. ``digit_a`` maps to +1, ``digit_b`` to -1."""
    keep = (labels == digit_a) | (labels == digit_b)
    if not keep.any() or not (labels == digit_a).any() or not (labels == digit_b).any():
        raise DataError(f"digits {digit_a} and {digit_b} are not both present")
    X = images[keep].reshape(int(keep.sum()), -1).astype(float) / 255.0
    y = np.where(labels[keep] == digit_a, 1.0, -1.0)
    return Dataset(X, y, "binary", name=name or f"mnist_{digit_a}v{digit_b}")


def concat_split(train: Dataset, test: Dataset) -> Dataset:
    """Join a fixed train/test pair into one split dataset."""
    X = np.vstack([train.X, test.X])
    y = np.concatenate([train.y, test.y])
    return Dataset(X, y, train.kind, train.name, np.arange(train.n), np.arange(train.n, train.n + test.n))
