"""Command-line entry point for the pFedGame simulator."""

import argparse
import sys
from typing import List, Optional

from app import __version__
from app.commands import COMMANDS
from app.config import get_settings, validate_configuration
from app.middleware.error_handler import create_error_handler
from app.middleware.logging_middleware import create_command_logging
from app.utils.logging import StructuredLogger, setup_logging

logger = StructuredLogger("main")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pfedgame",
        description="Deterministic simulator for decentralized federated learning with "
                    "game-theoretic aggregation. Set PFEDGAME_LOG to change log verbosity.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, run the command and return its exit code."""
    args = build_parser().parse_args(argv)

    if not validate_configuration():
        print("error [CONFIGURATION_ERROR]: invalid environment settings", file=sys.stderr)
        return 2
    setup_logging()
    settings = get_settings()
    logger.debug(f"📋 Environment: {settings.environment}", workers=settings.workers)

    handled = create_error_handler(include_details=settings.log_level == "DEBUG")(args.func)
    return create_command_logging()(handled)(args)


if __name__ == "__main__":
    sys.exit(main())
