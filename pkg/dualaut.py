#!/usr/bin/env python3
"""
DualAut Free Group Toolkit - Main Script

Command-line interface for cylinder images, dual automorphisms, suffix
tables, dual growth rates and the randomized verification suite.

Examples:
    python dualaut.py dual --rank 2 --moves "N(a,b)" b
    python dualaut.py growth --rank 2 --moves "N(a,b); N(b,a)" --json
    python dualaut.py oracle-check --auto phi.spec B "{BB, Ba}" --depth 2
"""

import argparse
import os
import signal
import sys
from typing import List, Optional

# Add the backend package and the project root to the Python path
ROOT = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, os.path.join(ROOT, "backend"))
sys.path.insert(0, ROOT)

from pydantic import ValidationError  # noqa: E402

from scripts.utils import (  # noqa: E402
    configure_logging,
    load_env_file,
    print_error,
    print_warning,
)


def handle_interrupt(signum, frame):
    """Handle interrupt signal (Ctrl+C)."""
    print("", file=sys.stderr)
    print_warning("Received interrupt signal")
    sys.exit(130)


def build_parser() -> argparse.ArgumentParser:
    """Set up the argument parser."""
    from scripts.commands import COMMANDS

    parser = argparse.ArgumentParser(description="DualAut Free Group Toolkit")
    parser.add_argument("command", choices=COMMANDS, help="Command to execute")
    parser.add_argument("words", nargs="*", help="Word argument(s): a word, or a word and a prefix set")
    parser.add_argument("--rank", type=int, help="Rank N of the free group")
    parser.add_argument("--moves", help="Move word, e.g. 'N(a,b); N(b,a)'")
    parser.add_argument("--auto", dest="auto_file", metavar="FILE", help="Automorphism file ('-' for stdin)")
    parser.add_argument("--json", dest="json_output", action="store_true", help="Print JSON")
    parser.add_argument("--seed", type=int, help="Seed for randomized checks")
    parser.add_argument("--depth", type=int, help="Prefix length m for oracle-check")
    parser.add_argument("--budget", type=int, help="Word-evaluation budget")
    parser.add_argument("--kmax", type=int, help="Iterations for the empirical growth sequence")
    parser.add_argument("--tol", type=float, help="Relative tolerance for the growth check")
    parser.add_argument(
        "--strategy", choices=("auto", "formula", "adaptive"), default="auto",
        help="How the general cylinder image is computed"
    )
    parser.add_argument("--instances", type=int, help="Instances per verify check")
    parser.add_argument("--checks", help="Comma-separated verify checks")
    parser.add_argument("--log-level", help="Override LOG_LEVEL")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main function."""
    load_env_file()

    from app.core.config import settings
    from scripts.commands import CommandSpec, run

    parser = build_parser()
    args = parser.parse_intermixed_args(argv)
    configure_logging(args.log_level or ("DEBUG" if settings.DEBUG else settings.LOG_LEVEL))

    # Only pass flags the user actually set, so settings supply the defaults
    fields = {
        key: value
        for key, value in vars(args).items()
        if value is not None and key not in ("log_level", "checks")
    }
    if args.checks:
        fields["checks"] = [c.strip() for c in args.checks.split(",") if c.strip()]
    try:
        spec = CommandSpec(**fields)
    except ValidationError as e:
        for error in e.errors():
            print_error(f"{'.'.join(str(p) for p in error['loc']) or 'arguments'}: {error['msg']}")
        return 1

    code, output = run(spec)
    if output:
        print(output)
    return code


if __name__ == "__main__":
    # Register signal handler for Ctrl+C
    signal.signal(signal.SIGINT, handle_interrupt)

    sys.exit(main())
