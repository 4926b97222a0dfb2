"""Per-epoch metric rows and the CSV layout shared by every trainer."""

from __future__ import annotations

import csv
import math
from dataclasses import astuple, dataclass

import numpy as np

CSV_HEADER = ("run_id", "method", "dataset", "seed", "epoch", "metric", "value")
METRIC_NAMES = ("train_mse", "test_mse", "train_err", "test_err", "epoch_wall_ms")


@dataclass(frozen=True)
class MetricsRecord:
    run_id: str
    method: str
    dataset: str
    seed: int
    epoch: int
    metric: str
    value: float

    def __post_init__(self):
        if self.epoch < 1:
            raise ValueError("epoch numbering starts at 1")
        if self.metric not in METRIC_NAMES:
            raise ValueError(f"unknown metric {self.metric!r}")
        if not math.isfinite(self.value):
            raise ValueError(f"non-finite value for {self.metric}")


class MetricsLog:
    """Collects records for one run."""

    def __init__(self, run_id, method, dataset, seed, timing=True):
        self.run_id, self.method, self.dataset, self.seed = run_id, method, dataset, seed
        self.timing = timing
        self.records: list[MetricsRecord] = []

    def add(self, epoch: int, values: dict):
        for name, value in values.items():
            if name == "epoch_wall_ms" and not self.timing:
                continue
            self.records.append(
                MetricsRecord(self.run_id, self.method, self.dataset, self.seed, epoch, name, float(value))
            )

    def series(self, metric: str) -> np.ndarray:
        return np.array([r.value for r in self.records if r.metric == metric])


def mse(pred, y) -> float:
    return float(np.mean((np.asarray(pred) - np.asarray(y)) ** 2)) if len(y) else 0.0


def error_rate(pred, y) -> float:
    return float(np.mean(np.asarray(pred) != np.asarray(y))) if len(y) else 0.0


def format_value(v: float) -> str:
    return repr(float(v))


def write_header(fh):
    csv.writer(fh, lineterminator="\n").writerow(CSV_HEADER)


def write_records(fh, records):
    w = csv.writer(fh, lineterminator="\n")
    for r in records:
        row = astuple(r)
        w.writerow((*row[:-1], format_value(row[-1])))


def read_records(path) -> list[MetricsRecord]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_HEADER:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        return [
            MetricsRecord(r["run_id"], r["method"], r["dataset"], int(r["seed"]), int(r["epoch"]),
                          r["metric"], float(r["value"]))
            for r in reader
        ]
