"""Logistic-regression SDA: Polya-Gamma EM weights driving a weighted SGD fit.

With ``omega_i = E[PG(1, y_i f(x_i))]`` the logistic log-likelihood is bounded
below by a weighted quadratic whose per-row term is
``omega_i * (f(x_i) - y_i / (2 omega_i))**2``. Each epoch recomputes the weights
from the current network and takes one SGD pass on that quadratic.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass

import numpy as np

from .config import RunConfig
from .data import Dataset
from .errors import DegenerateError, DimensionError
from .metrics import MetricsLog, error_rate
from .nn import NetworkParams, forward, predict, sgd_epoch
from .samplers import pg_em_weight
from .training import SGD, check_finite, initial_network, require_binary, sign_labels, stream

JITTER = 1e-8


@dataclass
class LogitSdaModel:
    net: NetworkParams


@dataclass
class LogitWeights:
    omega: np.ndarray
    z: np.ndarray


def compute_sample_weights(y, yhat) -> LogitWeights:
    y = np.asarray(y, dtype=float)
    yhat = np.asarray(yhat, dtype=float)
    if y.shape != yhat.shape:
        raise DimensionError("labels and outputs differ in length")
    z = y * yhat
    return LogitWeights(np.asarray(pg_em_weight(z)), z)


def exact_w1_update(Z1, y, omega) -> np.ndarray:
    """Weighted least-squares top-layer solve ``(Z1' Y Omega Y Z1) w = Z1' y / 2``.

    A ridge of 1e-8 is added (with a RuntimeWarning) when the system is
    numerically singular.
    """
    Z1 = np.asarray(Z1, dtype=float)
    y = np.asarray(y, dtype=float)
    omega = np.asarray(omega, dtype=float)
    if Z1.ndim != 2 or y.shape != (Z1.shape[0],) or omega.shape != y.shape:
        raise DimensionError("Z1 must be n x p with y and omega of length n")
    Xs = y[:, None] * Z1
    A = Xs.T @ (omega[:, None] * Xs)
    rhs = 0.5 * Z1.T @ y
    if np.linalg.cond(A) > 1e12:
        warnings.warn("weighted least-squares system is near singular; adding ridge jitter", RuntimeWarning,
                      stacklevel=2)
        A = A + JITTER * np.eye(A.shape[0])
        if np.linalg.cond(A) > 1e15:
            raise DegenerateError("weighted least-squares system is rank deficient")
    return np.linalg.solve(A, rhs)


def logistic_nll(scores, y) -> float:
    return float(np.sum(np.logaddexp(0.0, -np.asarray(y) * np.asarray(scores))))


def predict_logit(model: LogitSdaModel, X) -> np.ndarray:
    return sign_labels(predict(model.net, X))


def fit_logit(cfg: RunConfig, data: Dataset, run_id: str = "run") -> tuple[LogitSdaModel, MetricsLog]:
    """Per epoch: outputs -> EM weights -> one weighted SGD pass.

    Targets are ``y / (2 omega)`` with weights ``omega``. ``paper_literal`` keeps
    the labels themselves as targets and only passes ``omega`` as sample weights.
    ``exact_top`` additionally replaces the final layer (weights and bias) with
    the weighted least-squares solve on the top hidden features.
    """
    require_binary(data)
    Xtr, ytr = data.train()
    Xte, yte = data.test()
    model = LogitSdaModel(initial_network(cfg, data.p))
    log = MetricsLog(run_id, cfg.method, cfg.dataset_label(), cfg.seed, cfg.timing)

    for epoch in range(1, cfg.epochs + 1):
        t0 = time.perf_counter()
        w = compute_sample_weights(ytr, predict(model.net, Xtr))
        targets = ytr if cfg.paper_literal else ytr / (2.0 * w.omega)
        model.net, _ = sgd_epoch(
            model.net, Xtr, targets, sample_weights=w.omega, lr=cfg.lr, batch_size=cfg.batch_size,
            rng=stream(cfg, epoch, SGD), dropout_rates=cfg.dropout_rates, epoch=epoch,
        )
        if cfg.exact_top:
            Z1 = forward(model.net, Xtr).top_hidden
            Z1 = np.hstack([Z1, np.ones((Z1.shape[0], 1))])
            w1 = exact_w1_update(Z1, ytr, w.omega)
            model.net.weights[-1] = w1[:-1, None].copy()
            model.net.biases[-1] = w1[-1:].copy()
        wall = (time.perf_counter() - t0) * 1e3
        f_tr = predict(model.net, Xtr)
        check_finite(epoch, output=f_tr)

        log.add(epoch, {
            "train_err": error_rate(sign_labels(f_tr), ytr),
            "test_err": error_rate(predict_logit(model, Xte), yte),
            "epoch_wall_ms": wall,
        })
    return model, log
