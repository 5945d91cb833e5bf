"""Native learners, SGD training, accuracy and weighted aggregation.

Two architectures are supported: softmax regression and a one-hidden-layer ReLU
MLP, both trained with mini-batch SGD on mean cross-entropy. Aggregation works
on the flat parameter vectors, so every participant must share one ModelSpec.
"""

import json
import struct
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np

from app.models.dataset import Dataset
from app.models.learner import Model, ModelSpec, ParamVector, TrainConfig
from app.utils.errors import (
    AggregationError,
    DataValidationError,
    EmptyDatasetError,
    ModelShapeError,
    OutputError,
)
from app.utils.logging import StructuredLogger
from app.utils.validators import ensure_finite, validate_weights

logger = StructuredLogger("training_service")

PARAM_MAGIC = b"PVEC"


def init_model(spec: ModelSpec, seed: int) -> Model:
    """Glorot-uniform weights, zero biases; deterministic per (spec, seed)."""
    if spec.input_dim < 1 or spec.num_classes < 2:
        raise ModelShapeError("Model dimensions must be positive", actual=spec.model_dump())
    rng = np.random.default_rng(seed)
    tensors: Dict[str, np.ndarray] = {}
    for name, dims in spec.layout():
        if len(dims) == 1:
            tensors[name] = np.zeros(dims, dtype=np.float64)
        else:
            fan_in, fan_out = dims
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            tensors[name] = rng.uniform(-limit, limit, size=dims)
    return Model(spec, ParamVector.from_tensors(tensors, spec.layout()))


def _logits(spec: ModelSpec, values: np.ndarray, features: np.ndarray) -> np.ndarray:
    t = ParamVector(values, spec.layout()).tensors()
    if spec.kind == "softmax-regression":
        return features @ t["W"] + t["b"]
    hidden = np.maximum(features @ t["W1"] + t["b1"], 0.0)
    return hidden @ t["W2"] + t["b2"]


def _check_data(spec: ModelSpec, data: Dataset) -> None:
    if data.n == 0:
        raise EmptyDatasetError()
    if data.dim != spec.input_dim:
        raise ModelShapeError("Feature dimension mismatch", expected=spec.input_dim, actual=data.dim)
    if data.num_classes > spec.num_classes:
        raise ModelShapeError(
            "Dataset has more classes than the model", expected=spec.num_classes,
            actual=data.num_classes,
        )


def _loss_and_grad(
    spec: ModelSpec, values: np.ndarray, features: np.ndarray, labels: np.ndarray
) -> Tuple[float, np.ndarray]:
    n = labels.shape[0]
    t = ParamVector(values, spec.layout()).tensors()
    if spec.kind == "softmax-regression":
        hidden = None
        pre_hidden = None
        logits = features @ t["W"] + t["b"]
    else:
        pre_hidden = features @ t["W1"] + t["b1"]
        hidden = np.maximum(pre_hidden, 0.0)
        logits = hidden @ t["W2"] + t["b2"]

    shifted = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1))
    log_probs = shifted - log_norm[:, None]
    loss = float(-log_probs[np.arange(n), labels].mean())

    d_logits = np.exp(log_probs)
    d_logits[np.arange(n), labels] -= 1.0
    d_logits /= n

    grads: Dict[str, np.ndarray] = {}
    if hidden is None:
        grads["W"] = features.T @ d_logits
        grads["b"] = d_logits.sum(axis=0)
    else:
        grads["W2"] = hidden.T @ d_logits
        grads["b2"] = d_logits.sum(axis=0)
        d_hidden = (d_logits @ t["W2"].T) * (pre_hidden > 0.0)
        grads["W1"] = features.T @ d_hidden
        grads["b1"] = d_hidden.sum(axis=0)

    flat = np.concatenate([grads[name].reshape(-1) for name, _ in spec.layout()])
    return loss, flat


def loss_and_gradient(model: Model, data: Dataset) -> Tuple[float, ParamVector]:
    """Mean cross-entropy over the dataset and its analytic gradient."""
    _check_data(model.spec, data)
    loss, grad = _loss_and_grad(model.spec, model.params.values, data.features, data.labels)
    return loss, ParamVector(grad, model.params.layout)


def predict(model: Model, features: np.ndarray) -> np.ndarray:
    """Argmax class per row; ties go to the lowest class index."""
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.spec.input_dim:
        raise ModelShapeError(
            "Feature dimension mismatch", expected=model.spec.input_dim,
            actual=x.shape[1] if x.ndim == 2 else x.shape,
        )
    return np.argmax(_logits(model.spec, model.params.values, x), axis=1)


def train_local(model: Model, data: Dataset, cfg: TrainConfig) -> Model:
    """Mini-batch SGD continuing from the model's current parameters."""
    spec = model.spec
    _check_data(spec, data)

    values = np.array(model.params.values, dtype=np.float64, copy=True)
    rng = np.random.default_rng(cfg.seed)
    n = data.n
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            rows = order[start:start + cfg.batch_size]
            _, grad = _loss_and_grad(spec, values, data.features[rows], data.labels[rows])
            values -= cfg.learning_rate * grad

    ensure_finite(values, "train_local")
    logger.debug("🏋️ Local training finished", rows=n, epochs=cfg.epochs)
    return model.with_values(values)


def evaluate_accuracy(model: Model, data: Dataset) -> float:
    """Share of rows whose argmax prediction equals the label."""
    if data.n == 0:
        raise EmptyDatasetError("Cannot evaluate accuracy on an empty dataset")
    predictions = predict(model, data.features)
    return float(np.count_nonzero(predictions == data.labels)) / data.n


def aggregate(models: Sequence[Model], weights: Sequence[float]) -> Model:
    """Weighted element-wise sum of parameter vectors."""
    if not models:
        raise AggregationError("At least one model is required")
    spec = models[0].spec
    for other in models[1:]:
        if other.spec != spec:
            raise ModelShapeError("Cannot aggregate models with different specs",
                                  expected=spec.model_dump(), actual=other.spec.model_dump())
    w = validate_weights(weights, len(models))

    stacked = np.stack([m.params.values for m in models])
    combined = np.zeros(stacked.shape[1], dtype=np.float64)
    for weight, values in zip(w, stacked):
        combined += weight * values
    # rounding must not push the result outside the convex hull
    combined = np.clip(combined, stacked.min(axis=0), stacked.max(axis=0))

    ensure_finite(combined, "aggregate")
    return models[0].with_values(combined)


def fedavg_weights(sizes: Sequence[int]) -> list[float]:
    """Data-share weights n_k / n."""
    counts = [int(s) for s in sizes]
    if any(c < 0 for c in counts):
        raise AggregationError("Training sizes must be non-negative", weights=counts)
    total = sum(counts)
    if total < 1:
        raise AggregationError("At least one participant must hold training data", weights=counts)
    return [c / total for c in counts]


def encode_params(params: ParamVector, metadata: Optional[Dict[str, Any]] = None) -> bytes:
    """Layout header followed by little-endian float64 values."""
    header = json.dumps(
        {"layout": [[name, list(dims)] for name, dims in params.layout], "metadata": metadata or {}},
        sort_keys=True,
    ).encode("utf-8")
    body = params.values.astype("<f8").tobytes()
    return PARAM_MAGIC + struct.pack("<I", len(header)) + header + body


def decode_params(blob: bytes) -> Tuple[ParamVector, Dict[str, Any]]:
    """Inverse of encode_params."""
    if blob[:4] != PARAM_MAGIC or len(blob) < 8:
        raise DataValidationError("Not a parameter vector blob", field_name="magic")
    (header_len,) = struct.unpack("<I", blob[4:8])
    header_end = 8 + header_len
    try:
        header = json.loads(blob[8:header_end].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise DataValidationError(f"Corrupt parameter header: {e}", field_name="header") from e
    layout = tuple((str(name), tuple(int(d) for d in dims)) for name, dims in header["layout"])
    body = blob[header_end:]
    if len(body) % 8:
        raise DataValidationError("Truncated parameter body", field_name="values")
    values = np.frombuffer(body, dtype="<f8").astype(np.float64)
    return ParamVector(values, layout), dict(header.get("metadata", {}))


def save_checkpoint(model: Model, path: Union[str, Path]) -> None:
    """Write a model as a parameter blob carrying its spec."""
    target = Path(path)
    try:
        target.write_bytes(encode_params(model.params, {"spec": model.spec.model_dump()}))
    except OSError as e:
        raise OutputError(f"Failed to write checkpoint: {e}", path=str(target)) from e


def load_checkpoint(path: Union[str, Path]) -> Model:
    """Read a model written by save_checkpoint."""
    params, metadata = decode_params(Path(path).read_bytes())
    if "spec" not in metadata:
        raise DataValidationError("Checkpoint carries no model spec", field_name="spec")
    return Model(ModelSpec.model_validate(metadata["spec"]), params)
