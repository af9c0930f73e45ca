"""Command-line entry point.

Subcommands preflight | rate | clt | edge | stress, each taking
--config PATH plus optional --out/--seed/--threads overrides.
Exit codes: 0 success, 1 validation or usage error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import sys
import traceback

from .config import load_config
from .errors import ConfigError
from . import experiments


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on bad usage; the contract wants 1
    def error(self, message):
        raise _UsageError(message)


_RUNNERS = {
    "preflight": experiments.run_preflight,
    "rate": experiments.run_rate,
    "clt": experiments.run_clt,
    "edge": experiments.run_edge,
    "stress": experiments.run_stress,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="sbdrift",
        description="Bridge drift estimation experiments",
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    for name, help_text in (
        ("preflight", "truth-engine diagnostics per testbed"),
        ("rate", "convergence-rate and adaptivity experiment"),
        ("clt", "pointwise normality and coverage experiment"),
        ("edge", "terminal-edge error profile"),
        ("stress", "compact vs wide support comparison"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="YAML config path")
        p.add_argument("--out", default=None, help="output directory override")
        p.add_argument("--seed", type=int, default=None, help="seed override")
        p.add_argument("--threads", type=int, default=None,
                       help="worker thread override")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            return 1
        cfg = load_config(args.config)
        cfg = experiments.apply_overrides(
            cfg, out=args.out, seed=args.seed, threads=args.threads
        )
        artifacts = _RUNNERS[args.command](cfg)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        traceback.print_exc()
        print(f"run failed: {exc}", file=sys.stderr)
        return 2
    for path in (*artifacts.raw, *artifacts.processed, *artifacts.figures,
                 artifacts.manifest):
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
