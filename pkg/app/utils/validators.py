"""Validation helpers shared by the numeric services."""

from typing import Sequence

import numpy as np

from app.utils.errors import AggregationError, DataValidationError, NumericalError

WEIGHT_SUM_TOLERANCE = 1e-9
HISTOGRAM_SUM_TOLERANCE = 1e-9


def validate_weights(weights: Sequence[float], expected_length: int) -> np.ndarray:
    """Check aggregation weights: one per model, non-negative, summing to 1."""
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or w.shape[0] != expected_length:
        raise AggregationError(
            f"Expected {expected_length} weights, got {w.size}", weights=list(w.ravel())
        )
    if not np.all(np.isfinite(w)):
        raise AggregationError("Weights must be finite", weights=w.tolist())
    if np.any(w < 0.0):
        raise AggregationError("Weights must be non-negative", weights=w.tolist())
    total = float(w.sum())
    if abs(total - 1.0) > WEIGHT_SUM_TOLERANCE:
        raise AggregationError(f"Weights must sum to 1, got {total!r}", weights=w.tolist())
    return w


def validate_histogram(hist: Sequence[float], name: str = "histogram") -> np.ndarray:
    """Check a label-frequency vector is non-negative and normalized."""
    h = np.asarray(hist, dtype=np.float64)
    if h.ndim != 1 or h.size == 0:
        raise DataValidationError(f"{name} must be a non-empty vector", field_name=name)
    if np.any(h < 0.0) or not np.all(np.isfinite(h)):
        raise DataValidationError(f"{name} has negative or non-finite entries", field_name=name)
    total = float(h.sum())
    if abs(total - 1.0) > HISTOGRAM_SUM_TOLERANCE:
        raise DataValidationError(
            f"{name} must sum to 1, got {total!r}", field_name=name, field_value=total
        )
    return h


def ensure_finite(values: np.ndarray, operation: str) -> None:
    """Raise NumericalError when an array holds NaN or Inf."""
    if not np.all(np.isfinite(values)):
        raise NumericalError(f"Non-finite parameters after {operation}", operation=operation)
