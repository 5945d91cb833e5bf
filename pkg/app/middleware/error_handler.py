"""Error handling wrapper for command functions."""

import sys
import time
from argparse import Namespace
from functools import wraps
from typing import Callable

from app.utils.errors import PFedGameError, exit_code_for, format_error
from app.utils.logging import StructuredLogger

logger = StructuredLogger("error_handler")

Command = Callable[[Namespace], int]


class CommandErrorHandler:
    """Turns command exceptions into a stderr message and an exit code."""

    def __init__(self, include_details: bool = False):
        self.include_details = include_details

    def __call__(self, command: Command) -> Command:
        @wraps(command)
        def wrapped(args: Namespace) -> int:
            start_time = time.perf_counter()
            try:
                return command(args)

            except PFedGameError as e:
                duration = time.perf_counter() - start_time
                logger.error(
                    f"❌ Command error: {e.error_code}",
                    command=getattr(args, "command", None),
                    error_code=e.error_code,
                    error_message=e.message,
                    duration_seconds=duration,
                    details=e.details,
                )
                payload = format_error(e, self.include_details)["error"]
                line = f"error [{payload['code']}]: {payload['message']}"
                if self.include_details and payload.get("details"):
                    line += f" {payload['details']}"
                print(line, file=sys.stderr)
                return exit_code_for(e)

            except Exception as e:
                duration = time.perf_counter() - start_time
                logger.error(
                    f"❌ Unexpected error: {str(e)}",
                    command=getattr(args, "command", None),
                    duration_seconds=duration,
                    error_type=type(e).__name__,
                )
                message = str(e) if self.include_details else format_error(e)["error"]["message"]
                print(f"error [INTERNAL_ERROR]: {message}", file=sys.stderr)
                return exit_code_for(e)

        return wrapped


def create_error_handler(include_details: bool = False) -> CommandErrorHandler:
    """Create error handler instance."""
    return CommandErrorHandler(include_details)
