"""SDA training for binary classification under the hinge (SVM) likelihood.

Each latent ``z0`` carries a slack ``lam > 0``; given the slacks the hinge
pseudo-likelihood is Gaussian in both the scalar top weight ``W0`` and ``z0``.
There is no top-layer intercept.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .config import RunConfig
from .data import Dataset
from .errors import DegenerateError, DimensionError, ValidationError
from .metrics import MetricsLog, error_rate
from .nn import NetworkParams, predict, sgd_epoch, stack
from .samplers import sample_inverse_gaussian
from .training import LATENT, SGD, SLACK, TOP, check_finite, initial_network, require_binary, sign_labels, stream

MARGIN_FLOOR = 1e-8


@dataclass
class SvmSdaModel:
    net: NetworkParams
    W0: float = 1.0
    tau0: float = 1.0
    tauz: float = 1.0
    J: int = 1


def sample_lambda(y, Z0, W0, tau0, rng) -> np.ndarray:
    """Slacks via ``1/lam ~ IG(1 / |1 - y z0 W0|, tau0**-2)``; the margin distance is floored at 1e-8."""
    if tau0 <= 0:
        raise ValidationError("tau0 must be positive")
    y = np.asarray(y, dtype=float)
    Z0 = np.asarray(Z0, dtype=float)
    if y.shape != Z0.shape:
        raise DimensionError("y and Z0 differ in length")
    gap = np.maximum(np.abs(1.0 - y * Z0 * W0), MARGIN_FLOOR)
    return 1.0 / sample_inverse_gaussian(rng, 1.0 / gap, np.full_like(gap, 1.0 / tau0**2))


def w0_moments(y, Z0, lam) -> tuple[float, float]:
    y, Z0, lam = (np.asarray(a, dtype=float) for a in (y, Z0, lam))
    if np.any(~(lam > 0)):
        raise ValidationError("slacks must be positive")
    prec = float(np.sum(y * y * Z0 * Z0 / lam))
    if not prec > 0:
        raise DegenerateError("all latents are zero; W0 is unidentified")
    return float(np.sum(y * Z0 * (1.0 + lam) / lam)) / prec, 1.0 / prec


def sample_w0_svm(y, Z0, lam, rng) -> float:
    mu, var = w0_moments(y, Z0, lam)
    return float(mu + np.sqrt(var) * rng.standard_normal())


def latent_moments(y, f, W0, lam, tau0, tauz, paper_literal=False):
    """Per-row mean and variance of z0 given the label, network output and slack.

    Default: complete the square in z0 of
    ``(1 + lam - y z0 W0)^2 / (tau0^2 lam) + (z0 - f)^2 / tauz^2`` (uses y^2 = 1).
    ``paper_literal`` returns the printed hyper-parameters instead, read elementwise.
    """
    if tau0 <= 0 or tauz <= 0:
        raise ValidationError("tau0 and tauz must be positive")
    y, f, lam = (np.asarray(a, dtype=float) for a in (y, f, lam))
    if np.any(~(lam > 0)):
        raise ValidationError("slacks must be positive")
    t0, tz = tau0 * tau0, tauz * tauz
    if paper_literal:
        mean = (W0 * tz * y + t0 * f * lam) / (W0 * tz + t0 * lam)
        var = t0 * tz * lam / (W0 * W0 * tz + t0 * lam)
        return mean, var
    prec = W0 * W0 / (t0 * lam) + 1.0 / tz
    mean = (W0 * y * (1.0 + lam) / (t0 * lam) + f / tz) / prec
    return mean, 1.0 / prec


def sample_z0_svm(y, f_out, W0, lam, tau0, tauz, rng, J, paper_literal=False) -> np.ndarray:
    """Block-stacked latent copies; copy j uses slack block j and its own sub-stream."""
    n = np.shape(y)[0]
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (n * J,):
        raise DimensionError(f"expected {n * J} slacks, got {lam.shape}")
    out = []
    for j, child in enumerate(rng.spawn(int(J))):
        mean, var = latent_moments(y, f_out, W0, lam[j * n:(j + 1) * n], tau0, tauz, paper_literal)
        out.append(mean + np.sqrt(var) * child.standard_normal(n))
    return np.concatenate(out)


def svm_scores(model: SvmSdaModel, X) -> np.ndarray:
    return model.W0 * predict(model.net, X)


def predict_svm(model: SvmSdaModel, X) -> np.ndarray:
    return sign_labels(svm_scores(model, X))


def fit_svm(cfg: RunConfig, data: Dataset, run_id: str = "run") -> tuple[SvmSdaModel, MetricsLog]:
    require_binary(data)
    Xtr, ytr = data.train()
    Xte, yte = data.test()
    S = stack(Xtr, ytr, cfg.J)
    model = SvmSdaModel(initial_network(cfg, data.p), 1.0, cfg.tau0, cfg.tauz, cfg.J)
    Z0 = S.y.copy()
    log = MetricsLog(run_id, cfg.method, cfg.dataset_label(), cfg.seed, cfg.timing)

    for epoch in range(1, cfg.epochs + 1):
        t0 = time.perf_counter()
        lam = sample_lambda(S.y, Z0, model.W0, cfg.tau0, stream(cfg, epoch, SLACK))
        model.W0 = sample_w0_svm(S.y, Z0, lam, stream(cfg, epoch, TOP))
        model.net, _ = sgd_epoch(
            model.net, S.X, Z0, lr=cfg.lr, batch_size=cfg.batch_size, rng=stream(cfg, epoch, SGD),
            dropout_rates=cfg.dropout_rates, epoch=epoch,
        )
        f_tr = predict(model.net, Xtr)
        Z0 = sample_z0_svm(ytr, f_tr, model.W0, lam, cfg.tau0, cfg.tauz, stream(cfg, epoch, LATENT), cfg.J,
                           cfg.paper_literal)
        wall = (time.perf_counter() - t0) * 1e3
        check_finite(epoch, W0=model.W0, lam=lam, Z0=Z0)

        log.add(epoch, {
            "train_err": error_rate(sign_labels(model.W0 * f_tr), ytr),
            "test_err": error_rate(predict_svm(model, Xte), yte),
            "epoch_wall_ms": wall,
        })
    return model, log
