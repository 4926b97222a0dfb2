"""Bits shared by the SDA trainers and the plain-SGD baseline."""

from __future__ import annotations

import numpy as np

from .config import RunConfig
from .data import Dataset
from .errors import DataError, DivergedError
from .nn import NetworkParams, init_params
from .samplers import make_rng

# sub-stream tags under (seed, epoch, tag)
INIT, SGD, LATENT, SLACK, TOP = 0, 1, 2, 3, 4


def stream(cfg: RunConfig, epoch: int, tag: int) -> np.random.Generator:
    return make_rng(cfg.seed, epoch, tag)


def initial_network(cfg: RunConfig, n_inputs: int) -> NetworkParams:
    return init_params(n_inputs, cfg.hidden, stream(cfg, 0, INIT))


def check_finite(epoch: int, **values):
    for name, v in values.items():
        if not np.all(np.isfinite(v)):
            raise DivergedError(epoch, f"non-finite {name}")


def sign_labels(scores: np.ndarray) -> np.ndarray:
    """+1 where the score is strictly positive, -1 otherwise (ties included)."""
    return np.where(np.asarray(scores) > 0.0, 1.0, -1.0)


def require_binary(data: Dataset):
    if data.kind != "binary":
        raise DataError("classification trainer needs a binary dataset")
    _, y = data.train()
    if not ((y == 1.0).any() and (y == -1.0).any()):
        raise DataError("training labels contain a single class")


def require_regression(data: Dataset):
    if data.kind != "regression":
        raise DataError("regression trainer needs real-valued targets")
    if data.train()[1].shape[0] < 2:
        raise DataError("need at least two training rows")
