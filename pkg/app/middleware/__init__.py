"""Wrappers applied around every command."""

from .error_handler import CommandErrorHandler, create_error_handler
from .logging_middleware import CommandLogging, create_command_logging
