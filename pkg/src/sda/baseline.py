"""Plain mini-batch SGD on the ReLU network, the reference the SDA trainers are compared to."""

from __future__ import annotations

import time

from .config import RunConfig
from .data import Dataset
from .errors import DataError
from .metrics import MetricsLog, error_rate, mse
from .nn import NetworkParams, predict, sgd_epoch
from .training import SGD, initial_network, sign_labels, stream


def fit_baseline_dl(cfg: RunConfig, data: Dataset, run_id: str = "run") -> tuple[NetworkParams, MetricsLog]:
    """Squared loss on the raw targets; for binary data the targets are the +-1 labels
    and predictions are the sign of the output."""
    Xtr, ytr = data.train()
    Xte, yte = data.test()
    if Xtr.shape[0] == 0:
        raise DataError("empty training set")
    net = initial_network(cfg, data.p)
    log = MetricsLog(run_id, cfg.method, cfg.dataset_label(), cfg.seed, cfg.timing)
    binary = data.kind == "binary"

    for epoch in range(1, cfg.epochs + 1):
        t0 = time.perf_counter()
        net, _ = sgd_epoch(net, Xtr, ytr, lr=cfg.lr, batch_size=cfg.batch_size, rng=stream(cfg, epoch, SGD),
                           dropout_rates=cfg.dropout_rates, epoch=epoch)
        wall = (time.perf_counter() - t0) * 1e3
        f_tr, f_te = predict(net, Xtr), predict(net, Xte)
        if binary:
            vals = {"train_err": error_rate(sign_labels(f_tr), ytr), "test_err": error_rate(sign_labels(f_te), yte)}
        else:
            vals = {"train_mse": mse(f_tr, ytr), "test_mse": mse(f_te, yte)}
        vals["epoch_wall_ms"] = wall
        log.add(epoch, vals)
    return net, log
