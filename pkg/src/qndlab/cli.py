"""Command line entry point: ``qndlab run | list-specs | version``."""
from __future__ import annotations

import argparse
import json
import logging
import sys

from . import __version__
from .errors import ConfigError
from .experiments import EXIT_CONFIG, builtin_catalog, load_config, run_experiment, write_reports

log = logging.getLogger("qndlab")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qndlab", description="Quantitative non-divergence experiments")
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an experiment config")
    run.add_argument("config", help="path to a YAML experiment config")
    run.add_argument("--threads", type=int, default=1, help="worker threads (default 1)")
    run.add_argument("--budget", type=int, default=None, help="enumeration budget (candidates)")
    run.add_argument("--out", default="out", help="output directory (default ./out)")
    run.add_argument("--seed", type=int, default=None, help="override the config seed")
    run.add_argument("-v", "--verbose", action="store_true")
    sub.add_parser("list-specs", help="print built-in algebras and groups")
    sub.add_parser("version", help="print the version")
    return p


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "version":
        print(f"qndlab {__version__}")
        return 0
    if args.command == "list-specs":
        print(json.dumps(builtin_catalog(), indent=2, sort_keys=True))
        return 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    if args.seed is not None and args.seed < 0:
        print("error: --seed must be non-negative", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config, seed=args.seed, budget=args.budget)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    result = run_experiment(cfg, threads=args.threads)
    csv_path, json_path = write_reports(result, args.out)
    t = result.summary["totals"]
    print(f"{cfg.id}: {t['rows']} rows, {t['pass']} pass, {t['fail']} fail, {t['skip']} skip, "
          f"{t['partial']} partial -> {csv_path}")
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
