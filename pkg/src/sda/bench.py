"""Experiment orchestration: dataset preparation, trainer dispatch and CSV output."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .baseline import fit_baseline_dl
from .config import RunConfig
from .data import Dataset, concat_split, filter_binary, gen_blobs, gen_friedman, load_idx, split_dataset
from .errors import ConfigError
from .gaussian import fit_gaussian
from .logit import fit_logit
from .metrics import MetricsLog, write_header, write_records
from .samplers import make_rng
from .svm import fit_svm

log = logging.getLogger(__name__)

TRAINERS = {
    "sda-gr": fit_gaussian,
    "sda-svm": fit_svm,
    "sda-logit": fit_logit,
    "dl-baseline": fit_baseline_dl,
}

# stream keys kept apart from the (epoch, tag) keys the trainers use
_DATA_KEY = 2**31


def standardize(ds: Dataset) -> Dataset:
    """Z-score every column with training-set statistics; constant columns are only centred."""
    Xtr, _ = ds.train()
    mu = Xtr.mean(axis=0)
    sd = Xtr.std(axis=0)
    sd[sd == 0] = 1.0
    return Dataset((ds.X - mu) / sd, ds.y, ds.kind, ds.name, ds.train_idx, ds.test_idx)


def prepare_dataset(cfg: RunConfig) -> Dataset:
    """Build the (seeded) dataset a config describes and split it."""
    gen_rng = make_rng(cfg.seed, _DATA_KEY, 0)
    split_rng = make_rng(cfg.seed, _DATA_KEY, 1)
    if cfg.dataset == "friedman":
        ds = split_dataset(gen_friedman(cfg.n, cfg.p, cfg.sigma, gen_rng), cfg.train_frac, split_rng)
    elif cfg.dataset == "blobs":
        ds = split_dataset(gen_blobs(cfg.n, gen_rng), cfg.train_frac, split_rng)
    else:
        if not (cfg.mnist_images and cfg.mnist_labels):
            raise ConfigError("mnist dataset needs --mnist-images and --mnist-labels")
        a, b = cfg.digits
        train = filter_binary(*load_idx(cfg.mnist_images, cfg.mnist_labels), a, b)
        if cfg.mnist_test_images and cfg.mnist_test_labels:
            ds = concat_split(train, filter_binary(*load_idx(cfg.mnist_test_images, cfg.mnist_test_labels), a, b))
        else:
            ds = split_dataset(train, cfg.train_frac, split_rng)
    if cfg.standardize:
        ds = standardize(ds)
    return ds


def run_id_for(cfg: RunConfig) -> str:
    return f"{cfg.method}:{cfg.dataset_label()}:s{cfg.seed}"


def run_single(cfg: RunConfig, data: Dataset | None = None) -> MetricsLog:
    data = data if data is not None else prepare_dataset(cfg)
    _, metrics = TRAINERS[cfg.method](cfg, data, run_id=run_id_for(cfg))
    return metrics


def expand_grid(base: RunConfig, methods: Sequence[str], repeats: int) -> list[RunConfig]:
    """One config per (repeat, method); repeat r uses seed ``base.seed + r`` for every method,
    so methods within a repeat see the same data."""
    if repeats < 0:
        raise ConfigError("repeats must be nonnegative")
    return [base.replace(method=m, seed=base.seed + r) for r in range(repeats) for m in methods]


def _run_records(cfg):
    return run_single(cfg).records


def run_experiment(configs: Iterable[RunConfig], out_path, workers: int = 1) -> int:
    """Run every config and write one CSV row per (run, epoch, metric).

    Rows appear in config order regardless of ``workers``; each run's rows are
    flushed as soon as that run (and all earlier ones) finish. Returns the
    number of rows written.
    """
    configs = list(configs)
    out_path = Path(out_path)
    rows = 0
    with open(out_path, "w", newline="") as fh:
        write_header(fh)
        fh.flush()
        if workers > 1 and len(configs) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                results = pool.map(_run_records, configs)
                for cfg, records in zip(configs, results):
                    write_records(fh, records)
                    fh.flush()
                    rows += len(records)
                    log.info("finished %s", run_id_for(cfg))
        else:
            for cfg in configs:
                records = _run_records(cfg)
                write_records(fh, records)
                fh.flush()
                rows += len(records)
                log.info("finished %s", run_id_for(cfg))
    return rows


def median_curve(logs: Sequence[MetricsLog], metric: str) -> np.ndarray:
    return np.median(np.vstack([m.series(metric) for m in logs]), axis=0)
