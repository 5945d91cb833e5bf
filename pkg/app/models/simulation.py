"""Simulation configuration, per-round metrics and run results."""

import math
from dataclasses import dataclass, field
from typing import Annotated, Any, Dict, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from app.models.dataset import NodeData, PartitionMode
from app.models.game import GameConfig
from app.models.learner import Model, ModelKind, TrainConfig
from app.models.topology import Adjacency, TopologySchedule
from app.utils.errors import ConfigurationError

Algorithm = Literal["pfedgame", "fedavg-central", "local-only"]
MEAN_TOLERANCE = 1e-12


class SyntheticSource(BaseModel):
    """Gaussian class blobs generated on the fly."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["synthetic"] = "synthetic"
    num_classes: int = Field(default=10, ge=2, description="Number of classes")
    dim: int = Field(default=20, gt=0, description="Feature dimension")
    per_class: int = Field(default=200, ge=2, description="Rows per class")
    separation: float = Field(default=4.0, gt=0.0, description="Minimum centroid distance")
    seed: Optional[int] = Field(
        default=None, ge=0, lt=2**64, description="Data seed; derived from the master seed when unset"
    )


class CsvSource(BaseModel):
    """Rows read from a CSV file."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["csv"] = "csv"
    path: str = Field(..., min_length=1, description="CSV path")
    num_classes: Optional[int] = Field(default=None, ge=2, description="Class count; inferred when unset")


DatasetSource = Annotated[Union[SyntheticSource, CsvSource], Field(discriminator="kind")]


# Flat config keys, in the order they are documented.
FLAT_KEYS = (
    "seed", "rounds", "algorithm", "workers",
    "theta", "beta", "delta", "game_rounds", "early_exit_game",
    "epochs", "learning_rate", "batch_size", "train_seed",
    "model", "hidden_dim",
    "partition", "k", "allow_custom_k", "majority_fraction",
    "topology", "edge_probability", "rewire_fraction", "similarity_threshold", "topology_seed",
    "dataset", "num_classes", "dim", "per_class", "separation", "dataset_seed",
)


class SimConfig(BaseModel):
    """Everything that determines a run; the metric stream is a pure function of it."""

    model_config = ConfigDict(frozen=True)

    rounds: int = Field(default=20, ge=0, description="FL rounds T")
    algorithm: Algorithm = Field(default="pfedgame", description="Aggregation strategy")
    game: GameConfig = Field(default_factory=GameConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)
    model: ModelKind = Field(default="softmax-regression", description="Learner family")
    hidden_dim: int = Field(default=32, gt=0, description="Hidden width for mlp-1hidden")
    topology: TopologySchedule = Field(default_factory=TopologySchedule)
    partition: PartitionMode = Field(default_factory=PartitionMode)
    dataset: DatasetSource
    master_seed: int = Field(default=0, ge=0, lt=2**63, description="Root of all derived seeds")
    workers: Optional[int] = Field(default=None, ge=1, description="Per-round worker threads")

    def to_flat(self) -> Dict[str, Any]:
        """Flat JSON-ready mapping mirroring the CLI flags."""
        flat: Dict[str, Any] = {
            "seed": self.master_seed,
            "rounds": self.rounds,
            "algorithm": self.algorithm,
            "workers": self.workers,
            "theta": self.game.theta,
            "beta": self.game.beta,
            "delta": self.game.delta,
            "game_rounds": self.game.rounds,
            "early_exit_game": self.game.early_exit,
            "epochs": self.train.epochs,
            "learning_rate": self.train.learning_rate,
            "batch_size": self.train.batch_size,
            "train_seed": self.train.seed,
            "model": self.model,
            "hidden_dim": self.hidden_dim,
            "partition": self.partition.mode,
            "k": self.partition.k,
            "allow_custom_k": self.partition.allow_custom_k,
            "majority_fraction": self.partition.majority_fraction,
            "topology": self.topology.kind,
            "edge_probability": self.topology.edge_probability,
            "rewire_fraction": self.topology.rewire_fraction,
            "similarity_threshold": self.topology.similarity_threshold,
            "topology_seed": self.topology.seed,
        }
        if isinstance(self.dataset, SyntheticSource):
            flat.update({
                "dataset": "synthetic",
                "num_classes": self.dataset.num_classes,
                "dim": self.dataset.dim,
                "per_class": self.dataset.per_class,
                "separation": self.dataset.separation,
                "dataset_seed": self.dataset.seed,
            })
        else:
            flat.update({"dataset": self.dataset.path, "num_classes": self.dataset.num_classes})
        return flat

    @classmethod
    def from_flat(cls, flat: Dict[str, Any]) -> "SimConfig":
        """Build from a flat mapping; unknown keys and invalid values raise ConfigurationError."""
        unknown = sorted(set(flat) - set(FLAT_KEYS))
        if unknown:
            raise ConfigurationError(f"Unknown configuration key(s): {', '.join(unknown)}",
                                     config_key=unknown[0])
        values = {k: v for k, v in flat.items() if v is not None}
        if "dataset" not in values:
            raise ConfigurationError("A dataset source is required (synthetic or a CSV path)",
                                     config_key="dataset")

        def pick(mapping: Dict[str, str]) -> Dict[str, Any]:
            return {target: values[src] for src, target in mapping.items() if src in values}

        if values["dataset"] == "synthetic":
            dataset: Dict[str, Any] = {"kind": "synthetic", **pick({
                "num_classes": "num_classes", "dim": "dim", "per_class": "per_class",
                "separation": "separation", "dataset_seed": "seed",
            })}
        else:
            dataset = {"kind": "csv", "path": values["dataset"], **pick({"num_classes": "num_classes"})}

        payload: Dict[str, Any] = {
            **pick({"rounds": "rounds", "algorithm": "algorithm", "workers": "workers",
                    "seed": "master_seed", "model": "model", "hidden_dim": "hidden_dim"}),
            "game": pick({"theta": "theta", "beta": "beta", "delta": "delta",
                          "game_rounds": "rounds", "early_exit_game": "early_exit"}),
            "train": pick({"epochs": "epochs", "learning_rate": "learning_rate",
                           "batch_size": "batch_size", "train_seed": "seed"}),
            "partition": pick({"partition": "mode", "k": "k", "allow_custom_k": "allow_custom_k",
                               "majority_fraction": "majority_fraction"}),
            "topology": pick({"topology": "kind", "edge_probability": "edge_probability",
                              "rewire_fraction": "rewire_fraction",
                              "similarity_threshold": "similarity_threshold",
                              "topology_seed": "seed"}),
            "dataset": dataset,
        }
        return validated(cls, payload)


def validated(model_cls: Any, payload: Dict[str, Any]) -> Any:
    """Validate a payload, turning pydantic errors into a field-level ConfigurationError."""
    try:
        return model_cls.model_validate(payload)
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(part) for part in first["loc"]) or "config"
        messages = "; ".join(
            f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}" for err in e.errors()
        )
        raise ConfigurationError(f"Invalid configuration: {messages}", config_key=location) from e


class NodeMetrics(BaseModel):
    """One node's state at the end of a round."""

    node: int
    accuracy: float = Field(..., ge=0.0, le=1.0)
    peers: int = Field(..., ge=0)
    psi_x: float
    skipped: bool = False


class RoundMetrics(BaseModel):
    """Per-node results and their mean for one FL round."""

    fl_round: int = Field(..., ge=0)
    nodes: List[NodeMetrics]
    mean_accuracy: float = Field(..., ge=0.0, le=1.0)

    @model_validator(mode="after")
    def check_mean(self) -> "RoundMetrics":
        if self.nodes and not math.isclose(
            self.mean_accuracy, recompute_mean(self.nodes), rel_tol=0.0, abs_tol=MEAN_TOLERANCE
        ):
            raise ValueError("mean_accuracy disagrees with per-node accuracies")
        return self

    @classmethod
    def from_nodes(cls, fl_round: int, nodes: List[NodeMetrics]) -> "RoundMetrics":
        ordered = sorted(nodes, key=lambda m: m.node)
        return cls(fl_round=fl_round, nodes=ordered, mean_accuracy=recompute_mean(ordered))


def recompute_mean(nodes: List[NodeMetrics]) -> float:
    if not nodes:
        return 0.0
    return math.fsum(m.accuracy for m in nodes) / len(nodes)


class TraceRecord(BaseModel):
    """A game step tagged with its FL round and node."""

    fl_round: int
    node: int
    game_round: int
    psi_x: float
    candidate_acc: float
    accepted: bool


class RoundSummary(BaseModel):
    fl_round: int
    mean: float
    std: float


class NodeRoundSummary(BaseModel):
    """Per-(round, node) means over repeats."""

    fl_round: int
    node: int
    accuracy: float
    accuracy_std: float
    peers: float
    psi_x: float
    skipped: bool


@dataclass
class SimulationResult:
    """Output of one run: metric stream, final checkpoints, traces and graphs."""

    config: SimConfig
    metrics: List[RoundMetrics] = field(default_factory=list)
    models: Dict[int, Model] = field(default_factory=dict)
    traces: List[TraceRecord] = field(default_factory=list)
    adjacencies: Dict[int, Adjacency] = field(default_factory=dict)


@dataclass
class AveragedMetrics:
    """Element-wise statistics across repeated runs."""

    seeds: List[int]
    rounds: List[RoundSummary]
    nodes: List[NodeRoundSummary]
    runs: List[SimulationResult] = field(default_factory=list)

    @property
    def repeats(self) -> int:
        return len(self.seeds)


@dataclass
class SimulationState:
    """Per-node models and data carried between rounds.

    traces and adjacency describe the most recent round only.
    """

    models: Dict[int, Model]
    data: Dict[int, NodeData]
    histograms: Dict[int, np.ndarray]
    schedule: TopologySchedule
    traces: List[TraceRecord] = field(default_factory=list)
    adjacency: Optional[Adjacency] = None

    @property
    def node_ids(self) -> List[int]:
        return sorted(self.models)
