"""Command-line entry point: ``lteu-monitor analyze|simulate|detect``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from .config import load_config
from .errors import ConfigError, ContractError, DataInconsistencyError, StateMachineError
from .harness import JOBS_ENV, cmd_analyze, cmd_detect, cmd_simulate, default_jobs

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lteu-monitor", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("analyze", "analytical Pd/Pfa curves"),
        ("simulate", "per-seed duty-cycle estimates"),
        ("detect", "trial tables and empirical Pd/Pfa"),
    ):
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("--config", required=True, type=Path, help="JSON experiment config")
        sp.add_argument("--out", required=True, type=Path, help="output directory")
        sp.add_argument("--jobs", type=int, default=None,
                        help=f"worker processes (default: ${JOBS_ENV} or 1)")
    return p


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
    except ConfigError as e:
        print(f"config error in {e}", file=sys.stderr)
        return EXIT_CONFIG
    jobs = args.jobs if args.jobs is not None else default_jobs()
    try:
        if args.command == "analyze":
            paths = cmd_analyze(cfg, args.out)
        elif args.command == "simulate":
            paths = cmd_simulate(cfg, args.out, jobs)
        else:
            paths = cmd_detect(cfg, args.out, jobs)
    except (StateMachineError, DataInconsistencyError, ContractError) as e:
        print(f"invariant violation: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    for path in paths:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
