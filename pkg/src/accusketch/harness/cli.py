"""Command-line driver.

    accusketch approx-error --preset bimodal --out approx.csv
    accusketch bench-products --config bench.json --out bench.csv

Exit status: 0 on success, 1 on a configuration error, 2 on a runtime failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .config import ConfigError, ExperimentConfig, load_config, load_preset, preset_names
from .experiments import bench_products, run_approx_error, run_diagnose, run_tradeoff
from .records import BenchRecord, DiagnosticRecord, ExperimentRecord, emit_csv

log = logging.getLogger("accusketch")

COMMANDS = {
    "approx-error": ("approx_error", run_approx_error, ExperimentRecord),
    "tradeoff": ("tradeoff", run_tradeoff, ExperimentRecord),
    "diagnose": ("diagnose", run_diagnose, DiagnosticRecord),
    "bench-products": ("bench_products", bench_products, BenchRecord),
}
DEFAULT_PRESET = {
    "approx_error": "bimodal",
    "tradeoff": "tradeoff",
    "diagnose": "diagnose",
    "bench_products": "bench",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="accusketch", description="Sketched kernel ridge regression experiments."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        src = p.add_mutually_exclusive_group()
        src.add_argument("--config", help="JSON experiment config")
        src.add_argument("--preset", help=f"packaged config, one of {preset_names()}")
        p.add_argument("--seed", type=int, help="override master_seed")
        p.add_argument("--replicates", type=int, help="override replicate count")
        p.add_argument("--threads", type=int, help="parallel replicates")
        p.add_argument("--out", default="-", help="output CSV path ('-' for stdout)")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def resolve_config(args, experiment: str) -> ExperimentConfig:
    if args.config:
        cfg = load_config(args.config)
    else:
        cfg = load_preset(args.preset or DEFAULT_PRESET[experiment])
    if cfg.experiment != experiment:
        raise ConfigError(f"config is for {cfg.experiment!r}, not {experiment!r}")
    changes = {}
    if args.seed is not None:
        changes["master_seed"] = args.seed
    if args.replicates is not None:
        changes["replicates"] = args.replicates
    if args.threads is not None:
        changes["threads"] = args.threads
    return cfg.replace(**changes) if changes else cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    experiment, runner, record_type = COMMANDS[args.command]
    try:
        cfg = resolve_config(args, experiment)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return 1
    try:
        records = runner(cfg)
        emit_csv(records, sys.stdout if args.out == "-" else args.out, record_type)
    except Exception as exc:  # noqa: BLE001 - reported through the exit status
        log.error("run failed: %s", exc, exc_info=args.verbose)
        return 2
    log.info("wrote %d records to %s", len(records), args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
