"""Run configuration and the flat ``key=value`` config file format."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError

METHODS = ("sda-gr", "sda-svm", "sda-logit", "dl-baseline")
DATASETS = ("friedman", "blobs", "mnist")


@dataclass
class RunConfig:
    method: str = "sda-gr"
    hidden: tuple[int, ...] = (64,)
    dropout: tuple[float, ...] = ()
    epochs: int = 20
    lr: float = 0.01
    batch_size: int = 4
    J: int = 10
    tau0: float = 1.0
    tauz: float = 1.0
    seed: int = 0
    paper_literal: bool = False
    exact_top: bool = False
    dataset: str = "friedman"
    n: int = 1000
    p: int = 10
    sigma: float = 1.0
    train_frac: float = 0.7
    standardize: bool = True
    digits: tuple[int, int] = (3, 8)
    mnist_images: str = ""
    mnist_labels: str = ""
    mnist_test_images: str = ""
    mnist_test_labels: str = ""
    timing: bool = False

    def __post_init__(self):
        self.validate()

    @property
    def dropout_rates(self) -> tuple[float, ...]:
        return self.dropout if self.dropout else (0.0,) * len(self.hidden)

    def validate(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; choose from {METHODS}")
        if self.dataset not in DATASETS:
            raise ConfigError(f"unknown dataset {self.dataset!r}; choose from {DATASETS}")
        if any(h <= 0 for h in self.hidden):
            raise ConfigError("hidden layer sizes must be positive")
        if self.dropout and len(self.dropout) != len(self.hidden):
            raise ConfigError("need one dropout rate per hidden layer")
        if any(not 0.0 <= r < 1.0 for r in self.dropout):
            raise ConfigError("dropout rates must lie in [0, 1)")
        if self.epochs <= 0 or self.lr <= 0 or self.J <= 0 or self.batch_size <= 0:
            raise ConfigError("epochs, lr, J and batch_size must be positive")
        if self.tau0 <= 0 or self.tauz <= 0:
            raise ConfigError("tau0 and tauz must be positive")
        if not 0.0 < self.train_frac < 1.0:
            raise ConfigError("train_frac must lie in (0, 1)")
        if self.sigma < 0 or self.n <= 0 or self.p <= 0:
            raise ConfigError("bad dataset size or noise level")

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)

    def dataset_label(self) -> str:
        if self.dataset == "friedman":
            return f"friedman_n{self.n}_p{self.p}"
        if self.dataset == "mnist":
            return f"mnist_{self.digits[0]}v{self.digits[1]}"
        return f"blobs_n{self.n}"


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}
_ALIASES = {"layers": "hidden", "batch": "batch_size", "paper-literal": "paper_literal"}


def _coerce(name: str, raw):
    if not isinstance(raw, str):
        return raw
    raw = raw.strip()
    default = _FIELDS[name].default
    try:
        if isinstance(default, bool):
            low = raw.lower()
            if low not in ("1", "0", "true", "false", "yes", "no", "on", "off"):
                raise ValueError(raw)
            return low in ("1", "true", "yes", "on")
        if name in ("hidden", "digits"):
            return tuple(int(v) for v in raw.split(",") if v.strip())
        if name == "dropout":
            return tuple(float(v) for v in raw.split(",") if v.strip())
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
    except ValueError:
        raise ConfigError(f"cannot parse {name}={raw!r}") from None
    return raw


def config_from_mapping(values: dict, base: RunConfig | None = None) -> RunConfig:
    base = base or RunConfig()
    changes = {}
    for key, raw in values.items():
        name = _ALIASES.get(key, key).replace("-", "_")
        if name not in _FIELDS:
            raise ConfigError(f"unknown config key {key!r}")
        changes[name] = _coerce(name, raw)
    return base.replace(**changes)


def parse_config_text(text: str) -> dict[str, str]:
    """Parse ``key=value`` lines; blank lines and ``#`` comments are skipped."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def load_config(path, base: RunConfig | None = None) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return config_from_mapping(parse_config_text(text), base)


def dump_config(cfg: RunConfig) -> str:
    lines = []
    for name in _FIELDS:
        v = getattr(cfg, name)
        if isinstance(v, tuple):
            v = ",".join(str(x) for x in v)
        lines.append(f"{name}={v}")
    return "\n".join(lines) + "\n"
