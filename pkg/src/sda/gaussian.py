"""SDA training for Gaussian regression.

Model: ``y = W0 * z0 + b0 + N(0, tau0^2)`` and ``z0 = f(x) + N(0, tauz^2)`` where
``f`` is the ReLU network. Each epoch refits the scalar top layer from the
current stacked latents, takes one SGD pass of ``f`` towards those latents,
and then redraws all J latent copies from their Gaussian conditional.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .config import RunConfig
from .data import Dataset
from .errors import DegenerateError, DimensionError, ValidationError
from .metrics import MetricsLog, mse
from .nn import NetworkParams, predict, sgd_epoch, stack
from .training import LATENT, SGD, check_finite, initial_network, require_regression, stream


@dataclass
class GaussianSdaModel:
    net: NetworkParams
    W0: float = 1.0
    b0: float = 0.0
    tau0: float = 1.0
    tauz: float = 1.0
    J: int = 1


def update_top_layer(Z0: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Least-squares calibration ``W0 = Cov(Z0, y) / Var(Z0)``, ``b0 = mean(y) - W0 * mean(Z0)``.

    Population moments (divide by the number of rows); the ratio is the same
    under either convention.
    """
    Z0 = np.asarray(Z0, dtype=float)
    y = np.asarray(y, dtype=float)
    if Z0.shape != y.shape or Z0.ndim != 1:
        raise DimensionError("Z0 and y must be vectors of equal length")
    if Z0.size < 2:
        raise DegenerateError("need at least two latents")
    zc = Z0 - Z0.mean()
    var = float(np.mean(zc * zc))
    if not var > 0.0:
        raise DegenerateError("latent layer has zero variance")
    W0 = float(np.mean(zc * (y - y.mean()))) / var
    return W0, float(y.mean() - W0 * Z0.mean())


def latent_moments(y, f, W0, b0, tau0, tauz, paper_literal=False):
    """Mean and variance of z0 given y, f(x) and the top layer.

    ``paper_literal`` swaps the ``W0`` data-term factor for ``W0**2``; the two
    agree only at W0 = 1.
    """
    if tau0 <= 0 or tauz <= 0:
        raise ValidationError("tau0 and tauz must be positive")
    t0, tz = tau0 * tau0, tauz * tauz
    denom = W0 * W0 * tz + t0
    coef = W0 * W0 if paper_literal else W0
    mean = (coef * tz * (np.asarray(y) - b0) + t0 * np.asarray(f)) / denom
    return mean, t0 * tz / denom


def sample_z0_gaussian(y, f_out, W0, b0, tau0, tauz, rng, J, paper_literal=False) -> np.ndarray:
    """Draw J independent latent copies and stack them block-wise (copy j at rows j*n..)."""
    mean, var = latent_moments(y, f_out, W0, b0, tau0, tauz, paper_literal)
    sd = np.sqrt(var)
    n = np.shape(y)[0]
    return np.concatenate([mean + sd * child.standard_normal(n) for child in rng.spawn(int(J))])


def predict_gaussian(model: GaussianSdaModel, X) -> np.ndarray:
    return model.W0 * predict(model.net, X) + model.b0


def fit_gaussian(cfg: RunConfig, data: Dataset, run_id: str = "run") -> tuple[GaussianSdaModel, MetricsLog]:
    require_regression(data)
    Xtr, ytr = data.train()
    Xte, yte = data.test()
    S = stack(Xtr, ytr, cfg.J)
    model = GaussianSdaModel(initial_network(cfg, data.p), 1.0, 0.0, cfg.tau0, cfg.tauz, cfg.J)
    Z0 = S.y.copy()
    log = MetricsLog(run_id, cfg.method, cfg.dataset_label(), cfg.seed, cfg.timing)

    for epoch in range(1, cfg.epochs + 1):
        t0 = time.perf_counter()
        model.W0, model.b0 = update_top_layer(Z0, S.y)
        model.net, _ = sgd_epoch(
            model.net, S.X, Z0, lr=cfg.lr, batch_size=cfg.batch_size, rng=stream(cfg, epoch, SGD),
            dropout_rates=cfg.dropout_rates, epoch=epoch,
        )
        f_tr = predict(model.net, Xtr)
        Z0 = sample_z0_gaussian(ytr, f_tr, model.W0, model.b0, cfg.tau0, cfg.tauz,
                                stream(cfg, epoch, LATENT), cfg.J, cfg.paper_literal)
        wall = (time.perf_counter() - t0) * 1e3
        check_finite(epoch, W0=model.W0, b0=model.b0, Z0=Z0)

        log.add(epoch, {
            "train_mse": mse(model.W0 * f_tr + model.b0, ytr),
            "test_mse": mse(predict_gaussian(model, Xte), yte),
            "epoch_wall_ms": wall,
        })
    return model, log
