"""Start/finish logging around command functions."""

import time
from argparse import Namespace
from functools import wraps
from typing import Any, Callable, Dict

from app.utils.logging import StructuredLogger

logger = StructuredLogger("command_logging")

Command = Callable[[Namespace], int]


class CommandLogging:
    """Logs the arguments a command was started with and how it ended."""

    def __init__(self, log_arguments: bool = True, log_results: bool = True):
        self.log_arguments = log_arguments
        self.log_results = log_results

    def __call__(self, command: Command) -> Command:
        @wraps(command)
        def wrapped(args: Namespace) -> int:
            start_time = time.perf_counter()
            if self.log_arguments:
                self._log_start(args)
            exit_code = command(args)
            if self.log_results:
                self._log_finish(args, exit_code, time.perf_counter() - start_time)
            return exit_code

        return wrapped

    def _log_start(self, args: Namespace) -> None:
        arguments: Dict[str, Any] = {
            key: value for key, value in vars(args).items()
            if key not in ("func", "command") and value is not None
        }
        logger.info(f"📥 Command started: {getattr(args, 'command', '?')}", arguments=arguments)

    def _log_finish(self, args: Namespace, exit_code: int, duration: float) -> None:
        info = {
            "exit_code": exit_code,
            "duration_seconds": duration,
        }
        command = getattr(args, "command", "?")
        if exit_code == 0:
            logger.info(f"📤 Command finished: {command} ({duration:.3f}s)", **info)
        elif exit_code == 2:
            logger.warning(f"⚠️ Command rejected its configuration: {command}", **info)
        else:
            logger.error(f"❌ Command failed: {command}", **info)


def create_command_logging(log_arguments: bool = True, log_results: bool = True) -> CommandLogging:
    """Create command logging instance."""
    return CommandLogging(log_arguments, log_results)
