"""Shared command-line options and config resolution.

Precedence, highest first: flags, the --config JSON file, the --preset, then
the built-in defaults of SimConfig.
"""

import argparse
import json
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Optional, get_args

from app.commands.presets import PRESETS, expand_preset
from app.config import get_settings
from app.models.dataset import PartitionKind
from app.models.learner import ModelKind
from app.models.simulation import FLAT_KEYS, Algorithm, SimConfig
from app.models.topology import TopologyKind
from app.utils.errors import ConfigurationError

# (flag, flat key, type, help); store_const flags use type None.
CONFIG_FLAGS = (
    ("--seed", "seed", int, "Master seed; every other seed derives from it"),
    ("--rounds", "rounds", int, "FL rounds T"),
    ("--theta", "theta", float, "Peer-selection accuracy threshold"),
    ("--beta", "beta", float, "Minimum accuracy change the game acts on"),
    ("--delta", "delta", float, "psi step per game round"),
    ("--game-rounds", "game_rounds", int, "Game rounds r (delta * r <= 1)"),
    ("--early-exit-game", "early_exit_game", None, "Stop each game after its first rejection"),
    ("--k", "k", int, "Participant count (pinned for extreme/severe/homogeneous)"),
    ("--allow-custom-k", "allow_custom_k", None, "Permit a k other than the pinned value"),
    ("--majority-fraction", "majority_fraction", float, "Share of designated classes (modest)"),
    ("--edge-probability", "edge_probability", float, "Edge probability of random base graphs"),
    ("--rewire-fraction", "rewire_fraction", float, "Share of edges rewired each round"),
    ("--similarity-threshold", "similarity_threshold", float, "Minimum label similarity for an edge"),
    ("--topology-seed", "topology_seed", int, "Graph seed, mixed with the master seed"),
    ("--hidden-dim", "hidden_dim", int, "Hidden width for mlp-1hidden"),
    ("--epochs", "epochs", int, "Local epochs per round"),
    ("--learning-rate", "learning_rate", float, "SGD step size"),
    ("--batch-size", "batch_size", int, "Mini-batch size"),
    ("--train-seed", "train_seed", int, "Shuffling seed, mixed with master seed, node and round"),
    ("--dataset", "dataset", str, "'synthetic' or a CSV path with header f0,...,label"),
    ("--num-classes", "num_classes", int, "Classes (synthetic) or label range (CSV)"),
    ("--dim", "dim", int, "Synthetic feature dimension"),
    ("--per-class", "per_class", int, "Synthetic rows per class"),
    ("--separation", "separation", float, "Synthetic centroid separation"),
    ("--dataset-seed", "dataset_seed", int, "Synthetic data seed"),
    ("--workers", "workers", int, "Threads for per-node work within a round"),
)


def add_config_arguments(parser: argparse.ArgumentParser, grid: bool = False) -> None:
    """Options shared by commands that build SimConfigs."""
    parser.add_argument("--preset", choices=sorted(PRESETS), help="Named experiment setup")
    parser.add_argument(
        "--config", action="append", metavar="PATH",
        help="Flat JSON config file" + ("; repeat to compare several" if grid else ""),
    )
    if not grid:
        parser.add_argument("--algorithm", choices=get_args(Algorithm), help="Aggregation strategy")
        parser.add_argument("--partition", choices=get_args(PartitionKind), help="Heterogeneity regime")
    parser.add_argument("--topology", choices=get_args(TopologyKind), help="Topology schedule")
    parser.add_argument("--model", choices=get_args(ModelKind), help="Learner family")
    for flag, key, kind, text in CONFIG_FLAGS:
        if kind is None:
            parser.add_argument(flag, dest=key, action="store_const", const=True, help=text)
        else:
            parser.add_argument(flag, dest=key, type=kind, help=text)
    parser.add_argument("--repeats", type=int, default=1, help="Runs with seeds seed..seed+n-1")
    parser.add_argument("--output", help="Output directory (default: <output_root>/<timestamp>-<preset>)")


def flags_from_args(args: argparse.Namespace) -> Dict[str, Any]:
    """Flat keys given explicitly on the command line."""
    values = vars(args)
    return {key: values[key] for key in FLAT_KEYS if values.get(key) is not None}


def load_config_file(path: str) -> Dict[str, Any]:
    """Read a flat JSON config object."""
    source = Path(path)
    try:
        payload = json.loads(source.read_text(encoding="utf-8"))
    except OSError as e:
        raise ConfigurationError(f"Cannot read config file: {e}", config_key="config",
                                 config_value=path) from e
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"Config file is not valid JSON: {e}", config_key="config",
                                 config_value=path) from e
    if not isinstance(payload, dict):
        raise ConfigurationError("Config file must hold a JSON object", config_key="config",
                                 config_value=path)
    return payload


def merge_layers(preset: Optional[str], config_path: Optional[str],
                 flags: Dict[str, Any]) -> Dict[str, Any]:
    """Flat mapping after applying preset, file and flags in that order."""
    flat: Dict[str, Any] = expand_preset(preset) if preset else {}
    if config_path:
        flat.update(load_config_file(config_path))
    flat.update(flags)
    return flat


def parse_config(args: argparse.Namespace, config_path: Optional[str] = None) -> SimConfig:
    """Validated SimConfig from parsed arguments."""
    if config_path is None and args.config:
        if len(args.config) > 1:
            raise ConfigurationError("Only one --config file is accepted here", config_key="config")
        config_path = args.config[0]
    return SimConfig.from_flat(merge_layers(args.preset, config_path, flags_from_args(args)))


def check_repeats(args: argparse.Namespace) -> int:
    if args.repeats < 1:
        raise ConfigurationError("--repeats must be at least 1", config_key="repeats",
                                 config_value=args.repeats)
    return int(args.repeats)


def resolve_output(args: argparse.Namespace, label: Optional[str] = None) -> Path:
    """--output, or a timestamped directory under the configured output root."""
    if args.output:
        return Path(args.output)
    stamp = datetime.now().strftime("%Y%m%d-%H%M%S")
    return Path(get_settings().output_root) / f"{stamp}-{label or args.preset or 'custom'}"
