"""Command line entry point.

Exit codes: 0 success, 2 configuration error, 3 runtime failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from typing import Optional, Sequence

from .gridworld import MapError, load_map_file
from .harness import ConfigError, ExperimentConfig, run_experiment, run_sweep

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _load_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config)
    overrides = {}
    if getattr(args, "out", None):
        overrides["out"] = args.out
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "parallel", None) is not None:
        overrides["parallel"] = args.parallel
    try:
        return replace(cfg, **overrides)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_run(args) -> int:
    cfg = _load_config(args)
    returns, weights = run_experiment(cfg)
    print(returns)
    print(weights)
    return EXIT_OK


def cmd_plot(args) -> int:
    from .plotting import plot_dir
    for path in plot_dir(args.in_dir, args.out):
        print(path)
    return EXIT_OK


def cmd_validate_map(args) -> int:
    try:
        maze = load_map_file(args.file)
    except OSError as exc:
        raise ConfigError(f"cannot read map: {exc}") from exc
    free = len(maze.free_cells())
    print(f"{args.file}: ok ({maze.width}x{maze.height}, {free} free cells, goal {maze.goal})")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _load_config(args)
    print(run_sweep(cfg))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mobles", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an experiment config")
    r.add_argument("--config", required=True)
    r.add_argument("--out")
    r.add_argument("--seed", type=int)
    r.add_argument("--parallel", type=int)
    r.set_defaults(func=cmd_run)

    pl = sub.add_parser("plot", help="render SVG figures from result CSVs")
    pl.add_argument("--in", dest="in_dir", required=True)
    pl.add_argument("--out", required=True)
    pl.set_defaults(func=cmd_plot)

    v = sub.add_parser("validate-map", help="check a map file")
    v.add_argument("file")
    v.set_defaults(func=cmd_validate_map)

    s = sub.add_parser("sweep", help="grid search over baseline hyperparameters")
    s.add_argument("--config", required=True)
    s.add_argument("--out")
    s.add_argument("--parallel", type=int)
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, MapError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
