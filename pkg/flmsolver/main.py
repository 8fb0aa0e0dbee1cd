"""
FLM Solver - Facility Location with Matching
Command-line entry point: generate, solve, bench, verify, gap, history
JSON goes to stdout, logs to stderr
"""

import argparse
import sys
import traceback
from typing import List, Optional

from flmsolver import __version__
from flmsolver.commands import bench, gap, generate, history, solve, verify
from flmsolver.config import get_settings, reload_settings
from flmsolver.errors import FlmError
from flmsolver.utils.logger import configure, log_command, log_error, logger


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flmsolver",
        description="Approximation algorithms, LP relaxation and exact oracle for Facility Location with Matching.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR (default from FLM_LOG_LEVEL)")
    parser.add_argument("--db", default=None, help="SQLAlchemy URL or SQLite path for the run history")

    subparsers = parser.add_subparsers(dest="command", required=True)

    # Register command modules
    generate.register(subparsers)
    solve.register(subparsers)
    bench.register(subparsers)
    verify.register(subparsers)
    gap.register(subparsers)
    history.register(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Parse arguments and run a command

    Returns:
        Process exit code (0 ok, 1 verification failure, 2 precondition,
        3 capability)
    """
    parser = build_parser()
    args = parser.parse_args(argv)

    settings = reload_settings()
    configure(args.log_level or settings.log_level, settings.log_file)
    if args.db:
        args.database_url = args.db
    else:
        args.database_url = get_settings().database_url

    try:
        code = args.func(args)
        log_command(args.command, getattr(args, "instance", None), "success" if code == 0 else f"exit {code}")
        return code
    except FlmError as e:
        log_error(type(e).__name__, str(e))
        print(f"error: {e}", file=sys.stderr)
        log_command(args.command, getattr(args, "instance", None), f"exit {e.exit_code}")
        return e.exit_code
    except Exception as e:
        logger.error(f"Unhandled exception: {str(e)}\n{traceback.format_exc()}")
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
