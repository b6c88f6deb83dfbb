"""``fofpoly <subcommand> --config <path> [--out <dir>] [--threads k] [--seed s]``.

Exit status: 0 on success, 2 on a configuration error, 3 on a numeric
failure (degenerate oracle, failed search, failed verification).
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from .config import EXPERIMENTS, load_config
from .exceptions import (ConfigError, EpsilonTooLargeError, FofPolyError, InvalidArgumentError,
                         OutOfRangeError)
from .experiments import run_experiment, write_outputs

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fofpoly",
        description="Spectral-regularized function-on-function polynomial regression experiments.",
    )
    parser.add_argument("subcommand", choices=EXPERIMENTS)
    parser.add_argument("--config", help="JSON config; defaults are used when omitted")
    parser.add_argument("--out", help="output directory (overrides output_dir)")
    parser.add_argument("--threads", type=int, default=1, help="worker threads")
    parser.add_argument("--seed", type=int, help="master seed (overrides the config)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage, which matches the config-error code
        return int(exc.code or 0)

    try:
        cfg = load_config(args.config, seed=args.seed)
        if cfg.experiment is not None and cfg.experiment != args.subcommand:
            raise ConfigError(f"config is for {cfg.experiment!r}, not {args.subcommand!r}")
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        out = Path(args.out if args.out is not None else cfg.output_dir)
        t0 = time.perf_counter()
        result = run_experiment(args.subcommand, cfg, args.threads)
        paths = write_outputs(result, out)
    except (ConfigError, InvalidArgumentError, OutOfRangeError, EpsilonTooLargeError) as exc:
        print(f"fofpoly: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FofPolyError, ArithmeticError, AssertionError, MemoryError, ValueError) as exc:
        print(f"fofpoly: numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    for line in result.lines:
        print(line)
    print(f"wrote {paths['report']}, {paths['table']}, {paths['plot']} "
          f"({time.perf_counter() - t0:.2f} s)")
    if not result.ok:
        print(f"fofpoly: {args.subcommand} verification failed", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
