"""Command-line entry point: ``sparsecov <experiment> [options]``.

Exit codes: 0 success, 1 configuration error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from .experiments import (
    EXPERIMENTS,
    FIELD_NAMES,
    ConfigError,
    build_config,
    convert_value,
    load_config_file,
    run_experiment,
)
from .io import DataFormatError
from .matrix_core import NotPDError
from .shrinkage_gibbs import TruncationError

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3

log = logging.getLogger("sparsecov")

_HELP = {
    "seed": "master seed; every replication derives its own stream from it",
    "replications": "number of replications (default depends on the experiment)",
    "quick": "short chains (500 + 500) and 5 replications",
    "jobs": "worker processes for replications or LOOCV folds",
    "out": "output directory (default: sparsecov-<experiment>)",
    "data": "CSV file for lda/fit; 'planted' selects the bundled synthetic set",
    "k_features": "number of t-statistic-selected features for lda",
    "sampler": "estimator used by fit: shrinkage, sssl or sample",
    "estimators": "comma-separated estimators compared by c1/c2/lda",
    "c2_n": "comma-separated sample sizes for c2",
    "c2_mu": "comma-separated signal bounds for c2",
    "contraction_n": "comma-separated sample sizes for contraction",
    "full_data_selection": "lda: rank features once on all samples instead of per fold",
    "center": "fit: subtract column means before sampling (the model assumes mean zero)",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="sparsecov", description="Sparse covariance samplers and experiments.")
    ap.add_argument("experiment", choices=EXPERIMENTS)
    ap.add_argument("--config", help="key = value file; command-line flags take precedence")
    ap.add_argument("-v", "--verbose", action="store_true")
    for name in FIELD_NAMES:
        if name == "experiment":
            continue
        flag = "--" + name.replace("_", "-")
        if name in ("quick", "full_data_selection", "welch", "center"):
            ap.add_argument(flag, action="store_const", const="true", default=None, help=_HELP.get(name))
        else:
            ap.add_argument(flag, default=None, metavar=name.upper(), help=_HELP.get(name))
    return ap


def config_from_args(args: argparse.Namespace):
    file_values = load_config_file(args.config) if args.config else {}
    overrides = {}
    for name in FIELD_NAMES:
        raw = getattr(args, name, None)
        if name != "experiment" and raw is not None:
            overrides[name] = convert_value(name, raw)
    return build_config(args.experiment, file_values, overrides)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = config_from_args(args)
        report = run_experiment(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataFormatError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NotPDError, TruncationError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    out = report.write(cfg.out or f"sparsecov-{cfg.experiment}")
    print(report.text, end="")
    log.info("timing: %s", report.timing.rows)
    print(f"\nwrote {out}/")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
