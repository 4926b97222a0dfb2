"""Command line entry point: ``sda train | bench | verify-identities | gen-data``.

Exit codes: 0 ok, 2 config error, 3 data error, 4 diverged.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys

from . import bench
from .config import METHODS, RunConfig, config_from_mapping, load_config
from .data import gen_blobs, gen_friedman
from .errors import ConfigError, DataError, DegenerateError, DimensionError, DivergedError, ValidationError
from .samplers import make_rng, standard_identity_suite, verify_identity

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_DIVERGED = 0, 2, 3, 4

# flag dest -> RunConfig field
_RUN_FLAGS = {
    "layers": "hidden", "dropout": "dropout", "epochs": "epochs", "lr": "lr", "batch": "batch_size",
    "J": "J", "tau0": "tau0", "tauz": "tauz", "seed": "seed", "dataset": "dataset", "n": "n", "p": "p",
    "sigma": "sigma", "train_frac": "train_frac", "digits": "digits", "mnist_images": "mnist_images",
    "mnist_labels": "mnist_labels", "mnist_test_images": "mnist_test_images",
    "mnist_test_labels": "mnist_test_labels",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _add_run_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="key=value config file; flags override it")
    p.add_argument("--layers", help="hidden sizes, input side first, e.g. 64,64")
    p.add_argument("--dropout", help="dropout rate per hidden layer, e.g. 0.4,0.3")
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--batch", type=int)
    p.add_argument("--J", type=int, help="number of stacked latent copies")
    p.add_argument("--tau0", type=float)
    p.add_argument("--tauz", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--paper-literal", action="store_true", default=None,
                   help="use the printed latent/weight formulas instead of the derived conditionals")
    p.add_argument("--exact-top", action="store_true", default=None,
                   help="sda-logit: weighted least-squares solve for the final layer each epoch")
    p.add_argument("--no-standardize", action="store_true", help="feed raw inputs to the network")
    p.add_argument("--timing", action="store_true", default=None, help="add epoch_wall_ms rows")
    p.add_argument("--dataset", choices=("friedman", "blobs", "mnist"))
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=int)
    p.add_argument("--sigma", type=float)
    p.add_argument("--train-frac", type=float)
    p.add_argument("--mnist-images")
    p.add_argument("--mnist-labels")
    p.add_argument("--mnist-test-images")
    p.add_argument("--mnist-test-labels")
    p.add_argument("--digits", help="digit pair, first maps to +1, e.g. 3,8")
    p.add_argument("--out", default="metrics.csv")


def _config_from_args(args, method: str | None) -> RunConfig:
    base = load_config(args.config) if args.config else RunConfig()
    values = {field: getattr(args, dest) for dest, field in _RUN_FLAGS.items() if getattr(args, dest) is not None}
    for flag in ("paper_literal", "exact_top", "timing"):
        if getattr(args, flag):
            values[flag] = True
    if args.no_standardize:
        values["standardize"] = False
    if method is not None:
        values["method"] = method
    return config_from_mapping(values, base)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sda", description="Scalable data augmentation trainers and benchmarks")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="run one configuration")
    p.add_argument("--method", choices=METHODS)
    _add_run_flags(p)

    p = sub.add_parser("bench", help="run methods x repeats and write one metrics CSV")
    p.add_argument("--method", default="sda-gr,dl-baseline", help="comma separated methods")
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)
    _add_run_flags(p)

    p = sub.add_parser("verify-identities", help="check the normal-mixture identities numerically")
    p.add_argument("--tol", type=float, default=1e-6)

    p = sub.add_parser("gen-data", help="write a synthetic dataset to CSV")
    p.add_argument("--dataset", choices=("friedman", "blobs"), default="friedman")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--p", type=int, default=10)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="data.csv")
    return parser


def _cmd_train(args) -> int:
    cfg = _config_from_args(args, args.method)
    rows = bench.run_experiment([cfg], args.out)
    print(f"{bench.run_id_for(cfg)}: {rows} rows -> {args.out}")
    return EXIT_OK


def _cmd_bench(args) -> int:
    methods = [m.strip() for m in args.method.split(",") if m.strip()]
    bad = [m for m in methods if m not in METHODS]
    if bad:
        raise ConfigError(f"unknown method(s) {bad}")
    base = _config_from_args(args, methods[0] if methods else None)
    configs = bench.expand_grid(base, methods, args.repeats)
    rows = bench.run_experiment(configs, args.out, workers=args.workers)
    print(f"{len(configs)} runs, {rows} rows -> {args.out}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    failed = 0
    worst = {}
    for ident, x in standard_identity_suite():
        res = verify_identity(ident, x)
        tol = 1e-12 if ident.kind == "logit" else args.tol
        ok = res.abs_err < tol and res.converged
        failed += not ok
        worst[ident.kind] = max(worst.get(ident.kind, 0.0), res.abs_err)
        if not ok:
            print(f"FAIL {ident} x={x}: lhs={res.lhs!r} rhs={res.rhs!r} err={res.abs_err:.3e} {res.notes}")
    for kind, err in worst.items():
        print(f"{kind:6s} max abs err {err:.3e}")
    print("all identities verified" if not failed else f"{failed} checks failed")
    return EXIT_OK if not failed else 1


def _cmd_gen_data(args) -> int:
    rng = make_rng(args.seed, 2**31, 0)
    ds = gen_friedman(args.n, args.p, args.sigma, rng) if args.dataset == "friedman" else gen_blobs(args.n, rng)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"x{j + 1}" for j in range(ds.p)] + ["y"])
        for row, target in zip(ds.X, ds.y):
            w.writerow([repr(float(v)) for v in row] + [repr(float(target))])
    print(f"{ds.n} rows -> {args.out}")
    return EXIT_OK


_COMMANDS = {"train": _cmd_train, "bench": _cmd_bench, "verify-identities": _cmd_verify, "gen-data": _cmd_gen_data}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, ValidationError, DimensionError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DivergedError as exc:
        print(f"diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (DataError, DegenerateError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
