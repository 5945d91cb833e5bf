"""Named experiment setups, expressed in the flat config schema."""

from typing import Any, Dict

from app.utils.errors import ConfigurationError

_SYNTHETIC: Dict[str, Any] = {
    "dataset": "synthetic",
    "num_classes": 10,
    "dim": 20,
    "per_class": 200,
    "separation": 4.0,
}

_COMMON: Dict[str, Any] = {
    **_SYNTHETIC,
    "algorithm": "pfedgame",
    "rounds": 20,
    "theta": 0.5,
    "beta": 0.001,
    "game_rounds": 10,
    "delta": 0.1,
    "model": "softmax-regression",
    "epochs": 1,
    "learning_rate": 0.1,
    "batch_size": 32,
    "topology": "similarity-threshold",
    "similarity_threshold": 0.0,
}

PRESETS: Dict[str, Dict[str, Any]] = {
    "extreme-synthetic": {**_COMMON, "partition": "extreme", "k": 5},
    "severe-synthetic": {**_COMMON, "partition": "severe", "k": 10},
    "homogeneous-synthetic": {**_COMMON, "partition": "homogeneous", "k": 10},
    "modest-synthetic": {**_COMMON, "partition": "modest", "k": 10, "majority_fraction": 0.8},
    "dynamic-rewire": {
        **{k: v for k, v in _COMMON.items() if k != "similarity_threshold"},
        "partition": "extreme",
        "k": 5,
        "topology": "rewire-per-round",
        "edge_probability": 0.5,
        "rewire_fraction": 0.2,
    },
}


def expand_preset(name: str) -> Dict[str, Any]:
    """Flat settings for a preset; a fresh dict each call."""
    try:
        return dict(PRESETS[name])
    except KeyError:
        raise ConfigurationError(
            f"Unknown preset {name!r}; choose from {', '.join(sorted(PRESETS))}",
            config_key="preset", config_value=name,
        ) from None
