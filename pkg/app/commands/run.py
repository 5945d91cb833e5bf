"""`pfedgame run`: one configuration, optionally repeated."""

import argparse
from typing import Optional

from app.commands.options import add_config_arguments, check_repeats, parse_config, resolve_output
from app.models.simulation import AveragedMetrics
from app.services.report_service import ensure_writable, write_run_outputs
from app.services.simulation_service import repeat_and_average, run_simulation
from app.utils.logging import StructuredLogger, performance_monitor, timed_operation

logger = StructuredLogger("commands.run")


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser(
        "run",
        help="Run one simulation and write metrics, traces and checkpoints",
        description="Run a decentralized FL simulation. Flags override --config, which overrides --preset.",
    )
    add_config_arguments(parser)
    parser.set_defaults(func=cmd_run)


def cmd_run(args: argparse.Namespace) -> int:
    """Exit 0 after writing outputs; failures propagate to the command error handler."""
    cfg = parse_config(args)
    repeats = check_repeats(args)
    output = ensure_writable(resolve_output(args))

    averaged: Optional[AveragedMetrics] = None
    with timed_operation("simulate", repeats=repeats):
        if repeats > 1:
            averaged = repeat_and_average(cfg, repeats)
            result = averaged.runs[0]
        else:
            result = run_simulation(cfg)
    wall_time = performance_monitor.last_duration("simulate")

    write_run_outputs(output, result, averaged, wall_time)
    final = (averaged.rounds[-1].mean if averaged is not None and averaged.rounds
             else result.metrics[-1].mean_accuracy if result.metrics else None)
    print(f"output: {output}")
    if final is not None:
        print(f"final mean accuracy: {final:.4f}")
    return 0
