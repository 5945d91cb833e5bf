"""Model architecture, training configuration and parameter containers."""

from dataclasses import dataclass
from typing import Any, Dict, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.utils.errors import ModelShapeError

ModelKind = Literal["softmax-regression", "mlp-1hidden"]
Layout = Tuple[Tuple[str, Tuple[int, ...]], ...]


class ModelSpec(BaseModel):
    """Architecture descriptor shared by every participant in a run."""

    model_config = ConfigDict(frozen=True)

    kind: ModelKind = Field(default="softmax-regression", description="Learner family")
    input_dim: int = Field(..., gt=0, description="Feature dimension d")
    hidden_dim: Optional[int] = Field(default=None, gt=0, description="Hidden width (mlp only)")
    num_classes: int = Field(..., ge=2, description="Number of classes c")
    activation: Literal["relu"] = Field(default="relu", description="Hidden activation (mlp only)")

    @model_validator(mode="before")
    @classmethod
    def normalize_hidden(cls, data: Any) -> Any:
        """Drop hidden_dim for softmax so equal architectures compare equal."""
        if isinstance(data, dict) and data.get("kind", "softmax-regression") == "softmax-regression":
            data = {**data, "hidden_dim": None}
        return data

    @model_validator(mode="after")
    def check_hidden(self) -> "ModelSpec":
        if self.kind == "mlp-1hidden" and self.hidden_dim is None:
            raise ValueError("mlp-1hidden requires hidden_dim")
        return self

    def layout(self) -> Layout:
        """Tensor names and shapes in flattening order."""
        d, c = self.input_dim, self.num_classes
        if self.kind == "softmax-regression":
            return (("W", (d, c)), ("b", (c,)))
        h = int(self.hidden_dim or 0)
        return (("W1", (d, h)), ("b1", (h,)), ("W2", (h, c)), ("b2", (c,)))

    def param_count(self) -> int:
        return sum(int(np.prod(dims)) for _, dims in self.layout())


class TrainConfig(BaseModel):
    """Local SGD settings."""

    model_config = ConfigDict(frozen=True)

    epochs: int = Field(default=1, gt=0, description="Passes over the local train shard")
    learning_rate: float = Field(default=0.1, gt=0.0, description="SGD step size")
    batch_size: int = Field(default=32, ge=1, description="Mini-batch size")
    seed: int = Field(default=0, ge=0, lt=2**64, description="Shuffling seed")


@dataclass(frozen=True, eq=False)
class ParamVector:
    """Flat float64 parameters plus the layout mapping them onto tensors."""

    values: np.ndarray
    layout: Layout

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64, copy=True).ravel()
        expected = sum(int(np.prod(dims)) for _, dims in self.layout)
        if values.size != expected:
            raise ModelShapeError(
                "Parameter count does not match layout", expected=expected, actual=values.size
            )
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(
            self, "layout", tuple((str(n), tuple(int(x) for x in dims)) for n, dims in self.layout)
        )

    def __len__(self) -> int:
        return int(self.values.size)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ParamVector):
            return NotImplemented
        return self.layout == other.layout and np.array_equal(self.values, other.values)

    __hash__ = None  # type: ignore[assignment]

    def tensors(self) -> Dict[str, np.ndarray]:
        """Views of the flat vector shaped per layout entry."""
        out: Dict[str, np.ndarray] = {}
        offset = 0
        for name, dims in self.layout:
            size = int(np.prod(dims))
            out[name] = self.values[offset:offset + size].reshape(dims)
            offset += size
        return out

    @classmethod
    def from_tensors(cls, tensors: Dict[str, np.ndarray], layout: Layout) -> "ParamVector":
        flat = [np.asarray(tensors[name], dtype=np.float64).reshape(-1) for name, _ in layout]
        return cls(np.concatenate(flat) if flat else np.zeros(0), layout)


@dataclass(frozen=True, eq=False)
class Model:
    """A learner: architecture plus parameters."""

    spec: ModelSpec
    params: ParamVector

    def __post_init__(self) -> None:
        if self.params.layout != self.spec.layout():
            raise ModelShapeError(
                "Parameter layout does not match model spec",
                expected=self.spec.layout(),
                actual=self.params.layout,
            )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Model):
            return NotImplemented
        return self.spec == other.spec and self.params == other.params

    __hash__ = None  # type: ignore[assignment]

    def with_values(self, values: np.ndarray) -> "Model":
        return Model(self.spec, ParamVector(values, self.params.layout))
