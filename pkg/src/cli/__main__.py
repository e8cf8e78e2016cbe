"""Command-line entry point.

Usage:
    python -m src.cli stability --instance w.json
    cmu-lab regret --instance single.json --scheduler cmuhat-single --reps 50 --out runs/

stdout carries one JSON summary line; logs go to stderr. Exit codes: 0 success,
2 usage or configuration error, 3 analysis or runtime error.
"""

import argparse
import json
import logging
import sys

from pydantic import ValidationError

from src.cli.commands import COMMANDS, EXIT_ANALYSIS, EXIT_USAGE
from src.core.config import configure_logging
from src.core.errors import ConfigError
from src.core.run_config import load_run_config, merge_overrides

logger = logging.getLogger(__name__)


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="Run config JSON (flags override its values)")
    common.add_argument("--instance", help="Instance JSON file")
    common.add_argument("--scheduler", help="Scheduler string (the learner for regret)")
    common.add_argument("--genie", help="Genie scheduler for regret")
    common.add_argument("--priority", help="1-based links, e.g. 1-1,2-1,2-2")
    common.add_argument("--compare", action="append", help="Scheduler for busy-cycle-check")
    common.add_argument("--horizon", type=int, help="Slots T")
    common.add_argument("--reps", type=int, help="Replications")
    common.add_argument("--seed", type=int, help="Master seed")
    common.add_argument("--discount", type=float, help="Discount factor in (0, 1)")
    common.add_argument("--out", help="Output directory")
    common.add_argument("--truncation", type=int, help="Truncation bound for chain solves")
    common.add_argument("--tolerance", type=float, help="Boundary band for strict inequalities")
    common.add_argument("--workers", type=int, help="Worker processes for replications")
    common.add_argument(
        "--strict", action="store_true", default=None,
        help="Exit 3 when the analysis is inconclusive",
    )
    common.add_argument("--log-level", help="Log level (default from CMU_LOG_LEVEL)")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cmu-lab", description="Simulate and analyze cμ scheduling in parallel-server queues"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    common = _common_flags()
    for name, command in COMMANDS.items():
        subparsers.add_parser(name, parents=[common], help=(command.__doc__ or "").splitlines()[0])
    return parser


def main(argv: list[str] | None = None) -> int:
    """Run one subcommand and return its exit code."""
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)

    overrides = {
        "instance": args.instance,
        "scheduler": args.scheduler,
        "genie": args.genie,
        "priority": args.priority,
        "compare": args.compare,
        "horizon": args.horizon,
        "reps": args.reps,
        "seed": args.seed,
        "discount": args.discount,
        "out": args.out,
        "truncation": args.truncation,
        "tolerance": args.tolerance,
        "workers": args.workers,
        "strict": args.strict,
    }
    try:
        base = load_run_config(args.config) if args.config else None
        run_config = merge_overrides(base, overrides)
        code, summary = COMMANDS[args.command](run_config)
    except (ConfigError, ValidationError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, RuntimeError, OSError) as e:
        logger.debug("analysis failed", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ANALYSIS

    print(json.dumps(summary, sort_keys=True, default=str))
    return code


if __name__ == "__main__":
    sys.exit(main())
