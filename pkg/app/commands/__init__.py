"""Command-line subcommands."""

from . import compare, oracle, run

COMMANDS = (run, compare, oracle)
