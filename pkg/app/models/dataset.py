"""Dataset containers and heterogeneity partition settings."""

from dataclasses import dataclass
from typing import Any, Dict, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.utils.errors import DataValidationError

PartitionKind = Literal["extreme", "severe", "modest", "homogeneous"]

# Participant counts used by the reference experiments.
PINNED_K: Dict[str, int] = {"extreme": 5, "severe": 10, "homogeneous": 10}
DEFAULT_K: Dict[str, int] = {**PINNED_K, "modest": 10}


@dataclass(frozen=True, eq=False)
class Dataset:
    """Feature matrix, integer labels and class count."""

    features: np.ndarray
    labels: np.ndarray
    num_classes: int

    def __post_init__(self) -> None:
        features = np.array(self.features, dtype=np.float64, copy=True)
        labels = np.array(self.labels, dtype=np.int64, copy=True).ravel()
        if features.ndim == 1 and features.size == 0:
            features = features.reshape(0, 0)
        if features.ndim != 2:
            raise DataValidationError("Features must be a 2-D matrix", field_name="features")
        if features.shape[0] != labels.shape[0]:
            raise DataValidationError(
                f"{features.shape[0]} feature rows but {labels.shape[0]} labels",
                field_name="labels",
            )
        if self.num_classes < 1:
            raise DataValidationError("num_classes must be positive", field_name="num_classes")
        if labels.size and (labels.min() < 0 or labels.max() >= self.num_classes):
            raise DataValidationError(
                f"Labels must lie in [0, {self.num_classes})", field_name="labels"
            )
        if not np.all(np.isfinite(features)):
            raise DataValidationError("Features must be finite", field_name="features")
        features.flags.writeable = False
        labels.flags.writeable = False
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "num_classes", int(self.num_classes))

    @property
    def n(self) -> int:
        return int(self.labels.shape[0])

    @property
    def dim(self) -> int:
        return int(self.features.shape[1])

    def subset(self, rows: np.ndarray) -> "Dataset":
        rows = np.asarray(rows, dtype=np.int64)
        return Dataset(
            self.features[rows].reshape(rows.size, self.dim), self.labels[rows], self.num_classes
        )


@dataclass(frozen=True)
class NodeData:
    """A participant's shard, split into train and test rows."""

    train: Dataset
    test: Dataset


class PartitionMode(BaseModel):
    """Heterogeneity regime and participant count."""

    model_config = ConfigDict(frozen=True)

    mode: PartitionKind = Field(default="extreme", description="Heterogeneity regime")
    k: int = Field(default=0, ge=0, description="Participant count (0 = regime default)")
    majority_fraction: float = Field(
        default=0.8, gt=0.0, le=1.0, description="Share of designated classes (modest only)"
    )
    allow_custom_k: bool = Field(default=False, description="Permit k other than the pinned value")

    @model_validator(mode="before")
    @classmethod
    def fill_default_k(cls, data: Any) -> Any:
        if isinstance(data, dict) and not data.get("k"):
            mode = data.get("mode", "extreme")
            data = {**data, "k": DEFAULT_K.get(mode, 0)}
        return data

    @model_validator(mode="after")
    def check_pinned_k(self) -> "PartitionMode":
        if self.k < 1:
            raise ValueError("k must be at least 1")
        pinned: Optional[int] = PINNED_K.get(self.mode)
        if pinned is not None and self.k != pinned and not self.allow_custom_k:
            raise ValueError(
                f"{self.mode} partition uses k={pinned}; set allow_custom_k to use k={self.k}"
            )
        return self
