"""Command-line interface: sweep, figure and selftest subcommands.

Exit codes: 0 success, 2 validation failure, 3 consistency-gate failure,
4 numerical-convergence failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import fields, replace

from . import __version__
from .analytic import ConvergenceError
from .config import ConfigError, SweepSpec, load_config, save_config
from .figures import FIGURE_IDS, reproduce_figure
from .selftest import run_selftest
from .sweep import consistency_report, emit_csv, emit_manifest, run_sweep

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_GATE = 3
EXIT_NUMERICAL = 4

_METHOD_LETTERS = {"a": "analytic", "m": "montecarlo", "s": "asymptotic"}


def _parse_methods(text: str) -> tuple[str, ...]:
    out = []
    for item in text.split(","):
        item = item.strip()
        name = _METHOD_LETTERS.get(item, item)
        if name not in _METHOD_LETTERS.values():
            raise ConfigError(f"unknown method '{item}' in --methods")
        if name not in out:
            out.append(name)
    if not out:
        raise ConfigError("--methods must name at least one method")
    return tuple(out)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relaysel",
        description="Bidirectional AF relay selection under outdated CSI: "
                    "simulation, closed-form SER curves, figure presets.")
    parser.add_argument("--version", action="version", version=f"relaysel {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="run the sweep described by a config file")
    p_sweep.add_argument("--config", required=True, help="TOML config path")
    p_sweep.add_argument("--out", default="relaysel-out", help="output directory")
    p_sweep.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_sweep.add_argument("--trials", type=int, default=None, help="override Monte-Carlo trials")
    p_sweep.add_argument("--methods", default=None,
                         help="override methods, e.g. a,m,s or analytic,montecarlo")
    p_sweep.add_argument("--workers", type=int, default=None, help="worker pool size")

    p_fig = sub.add_parser("figure", help="reproduce a reference figure dataset")
    p_fig.add_argument("--id", type=int, required=True, choices=FIGURE_IDS)
    p_fig.add_argument("--out", default="relaysel-out", help="output directory")
    p_fig.add_argument("--trials", type=int, default=None, help="override Monte-Carlo trials")
    p_fig.add_argument("--seed", type=int, default=None, help="override the preset seed")
    p_fig.add_argument("--workers", type=int, default=None, help="worker pool size")

    p_self = sub.add_parser("selftest", help="run the built-in numerical checks")
    p_self.add_argument("--verbose", action="store_true")
    return parser


def _cmd_sweep(args) -> int:
    loaded = load_config(args.config)
    overrides = {}
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError("--seed must be nonnegative")
        overrides["seed"] = args.seed
    if args.trials is not None:
        if args.trials < 1:
            raise ConfigError("--trials must be >= 1")
        overrides["trials"] = args.trials
    if args.methods is not None:
        overrides["methods"] = _parse_methods(args.methods)
    if overrides:
        kept = {f.name: getattr(loaded.sweep, f.name) for f in fields(SweepSpec)}
        kept.update(overrides)
        loaded = replace(loaded, sweep=SweepSpec(**kept))

    os.makedirs(args.out, exist_ok=True)
    curves = run_sweep(loaded, workers=args.workers)
    report = consistency_report(curves)

    prefix = loaded.sweep.prefix
    csv_path = os.path.join(args.out, f"{prefix}.csv")
    emit_csv(curves, csv_path)
    emit_manifest(loaded, curves, report, os.path.join(args.out, f"{prefix}_manifest.json"))
    save_config(loaded, os.path.join(args.out, f"{prefix}_config.toml"))

    print(f"wrote {csv_path} ({len(curves)} curves)")
    if report["pairs"]:
        print(f"montecarlo-vs-analytic: max {report['max_sigma']:.2f} half-widths "
              f"over {len(report['pairs'])} curve pairs")
    gate = loaded.sweep.consistency_gate
    if gate is not None and report["max_sigma"] > gate:
        print(f"consistency gate FAILED: {report['max_sigma']:.2f} > {gate}", file=sys.stderr)
        return EXIT_GATE
    return EXIT_OK


def _cmd_figure(args) -> int:
    result = reproduce_figure(args.id, args.out, trials=args.trials, seed=args.seed,
                              workers=args.workers)
    print(f"wrote {result['csv']} ({result['curves']} curves), plot stub {result['plot']}")
    return EXIT_OK


def _cmd_selftest(args) -> int:
    passed, lines = run_selftest(verbose=args.verbose)
    print("\n".join(lines))
    return EXIT_OK if passed else EXIT_NUMERICAL


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "figure":
            return _cmd_figure(args)
        return _cmd_selftest(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ConvergenceError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
