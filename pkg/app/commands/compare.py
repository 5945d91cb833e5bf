"""`pfedgame compare`: final mean accuracy per algorithm and heterogeneity regime."""

import argparse
from typing import Any, Dict, List, Optional, Sequence

from app.commands.options import (
    add_config_arguments,
    check_repeats,
    flags_from_args,
    merge_layers,
    resolve_output,
)
from app.models.simulation import SimConfig
from app.services.report_service import ensure_writable, format_table, write_comparison
from app.services.simulation_service import repeat_and_average
from app.utils.errors import ConfigurationError
from app.utils.logging import StructuredLogger

logger = StructuredLogger("commands.compare")

# Keys allowed to differ between compared configurations.
VARYING_KEYS = {"algorithm", "partition", "k", "allow_custom_k", "majority_fraction", "workers"}
DATASET_KEYS = ("dataset", "num_classes", "dim", "per_class", "separation", "dataset_seed")


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser(
        "compare",
        help="Compare algorithms across heterogeneity regimes",
        description="Runs the algorithm x partition grid (or the given --config files) "
                    "and prints final-round mean accuracy per cell.",
    )
    add_config_arguments(parser, grid=True)
    parser.add_argument("--algorithms", help="Comma-separated algorithms, e.g. pfedgame,local-only")
    parser.add_argument("--partitions", help="Comma-separated regimes, e.g. extreme,severe")
    parser.set_defaults(func=cmd_compare)


def _split(value: Optional[str]) -> List[str]:
    return [part.strip() for part in value.split(",") if part.strip()] if value else []


def build_configs(args: argparse.Namespace) -> List[SimConfig]:
    """Grid expansion, or one config per --config file."""
    flags = flags_from_args(args)
    algorithms = _split(args.algorithms)
    partitions = _split(args.partitions)
    files = args.config or []

    if len(files) > 1:
        if algorithms or partitions:
            raise ConfigurationError(
                "Use either several --config files or --algorithms/--partitions, not both",
                config_key="config",
            )
        return [SimConfig.from_flat(merge_layers(args.preset, path, flags)) for path in files]

    base = merge_layers(args.preset, files[0] if files else None, flags)
    algorithms = algorithms or [base.get("algorithm", "pfedgame")]
    partitions = partitions or [base.get("partition", "extreme")]
    configs = []
    for algorithm in algorithms:
        for mode in partitions:
            flat = {**base, "algorithm": algorithm, "partition": mode}
            if "k" not in flags and mode != base.get("partition"):
                # each regime falls back to its own participant count
                flat.pop("k", None)
            configs.append(SimConfig.from_flat(flat))
    return configs


def check_compatible(configs: Sequence[SimConfig]) -> None:
    """All configs share data and seed and differ only in algorithm or regime."""
    if len(configs) < 2:
        raise ConfigurationError("compare needs at least two configurations", config_key="config")
    reference = configs[0].to_flat()
    cells = set()
    for cfg in configs:
        flat = cfg.to_flat()
        if any(flat.get(key) != reference.get(key) for key in DATASET_KEYS):
            raise ConfigurationError("Compared configurations use different datasets",
                                     config_key="dataset", config_value=flat.get("dataset"))
        if flat["seed"] != reference["seed"]:
            raise ConfigurationError("Compared configurations use different seeds",
                                     config_key="seed", config_value=flat["seed"])
        differing = sorted(k for k in flat if k not in VARYING_KEYS and flat[k] != reference[k])
        if differing:
            raise ConfigurationError(
                f"Compared configurations may differ only in algorithm or partition; "
                f"also differ in: {', '.join(differing)}",
                config_key=differing[0],
            )
        cell = (cfg.algorithm, cfg.partition.mode)
        if cell in cells:
            raise ConfigurationError(f"Duplicate comparison cell {cell}", config_key="config")
        cells.add(cell)
    if configs[0].rounds < 1:
        raise ConfigurationError("compare needs at least one FL round", config_key="rounds")


def cmd_compare(args: argparse.Namespace) -> int:
    configs = build_configs(args)
    check_compatible(configs)
    repeats = check_repeats(args)
    output = ensure_writable(resolve_output(args, label="compare"))

    columns: List[str] = []
    for cfg in configs:
        if cfg.partition.mode not in columns:
            columns.append(cfg.partition.mode)
    present = {(cfg.algorithm, cfg.partition.mode) for cfg in configs}
    missing: List[Any] = [
        (a, c) for a in dict.fromkeys(cfg.algorithm for cfg in configs) for c in columns
        if (a, c) not in present
    ]
    if missing:
        raise ConfigurationError(f"Comparison grid is incomplete; missing {missing}",
                                 config_key="config")

    rows: Dict[str, Dict[str, float]] = {}
    for cfg in configs:
        averaged = repeat_and_average(cfg, repeats)
        final = averaged.rounds[-1].mean
        rows.setdefault(cfg.algorithm, {})[cfg.partition.mode] = final
        logger.info("📊 Comparison cell done", algorithm=cfg.algorithm,
                    partition=cfg.partition.mode, final_mean_accuracy=final)

    print(format_table(rows, columns))
    path = write_comparison(output / "compare.csv", rows, columns)
    print(f"output: {path}")
    return 0
