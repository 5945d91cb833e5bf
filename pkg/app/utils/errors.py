"""Error handling utilities for the pFedGame simulator."""

from datetime import datetime, timezone
from typing import Any, Dict, Optional


class PFedGameError(Exception):
    """Base exception for the simulator."""

    def __init__(self, message: str, error_code: str = "INTERNAL_ERROR",
                 details: Optional[Dict[str, Any]] = None):
        self.message = message
        self.error_code = error_code
        self.details = details or {}
        self.timestamp = datetime.now(timezone.utc)
        super().__init__(self.message)

    def to_dict(self) -> Dict[str, Any]:
        """Convert error to dictionary format."""
        return {
            "error": {
                "code": self.error_code,
                "message": self.message,
                "timestamp": self.timestamp.isoformat(),
                "details": self.details,
            }
        }


class ConfigurationError(PFedGameError):
    """Exception for configuration errors."""

    def __init__(self, message: str, config_key: Optional[str] = None,
                 config_value: Optional[Any] = None):
        details: Dict[str, Any] = {}
        if config_key:
            details["field"] = config_key
        if config_value is not None:
            details["config_value"] = str(config_value)

        super().__init__(message, "CONFIGURATION_ERROR", details)


class DataValidationError(PFedGameError):
    """Exception for dataset and input validation errors."""

    def __init__(self, message: str, field_name: Optional[str] = None,
                 field_value: Optional[Any] = None, line_number: Optional[int] = None,
                 error_code: str = "DATA_VALIDATION_ERROR"):
        details: Dict[str, Any] = {}
        if field_name:
            details["field_name"] = field_name
        if field_value is not None:
            details["field_value"] = str(field_value)
        if line_number is not None:
            details["line_number"] = line_number

        super().__init__(message, error_code, details)


class EmptyDatasetError(DataValidationError):
    """Raised when an operation needs at least one row."""

    def __init__(self, message: str = "Dataset is empty"):
        super().__init__(message, error_code="EMPTY_DATASET")


class PartitionError(DataValidationError):
    """Raised when a dataset cannot be split the requested way."""

    def __init__(self, message: str, mode: Optional[str] = None, k: Optional[int] = None):
        super().__init__(message, field_name="partition", field_value=mode,
                         error_code="PARTITION_ERROR")
        if k is not None:
            self.details["k"] = k


class ModelShapeError(PFedGameError):
    """Exception for incompatible model specs or dimensions."""

    def __init__(self, message: str, expected: Optional[Any] = None,
                 actual: Optional[Any] = None):
        details: Dict[str, Any] = {}
        if expected is not None:
            details["expected"] = str(expected)
        if actual is not None:
            details["actual"] = str(actual)

        super().__init__(message, "MODEL_SHAPE_ERROR", details)


class NumericalError(PFedGameError):
    """Raised when parameters stop being finite."""

    def __init__(self, message: str, operation: Optional[str] = None):
        details = {"operation": operation} if operation else {}
        super().__init__(message, "NUMERICAL_ERROR", details)


class AggregationError(PFedGameError):
    """Exception for invalid aggregation requests."""

    def __init__(self, message: str, weights: Optional[Any] = None):
        details: Dict[str, Any] = {}
        if weights is not None:
            details["weights"] = str(weights)

        super().__init__(message, "AGGREGATION_ERROR", details)


class TopologyError(PFedGameError):
    """Exception for topology schedule and adjacency errors."""

    def __init__(self, message: str, node: Optional[Any] = None, kind: Optional[str] = None):
        details: Dict[str, Any] = {}
        if node is not None:
            details["node"] = str(node)
        if kind:
            details["kind"] = kind

        super().__init__(message, "TOPOLOGY_ERROR", details)


class PeerSelectionError(PFedGameError):
    """Exception raised by peer selection."""

    def __init__(self, message: str, node: Optional[Any] = None):
        details = {"node": str(node)} if node is not None else {}
        super().__init__(message, "PEER_SELECTION_ERROR", details)


class GameError(PFedGameError):
    """Exception raised by the aggregation game."""

    def __init__(self, message: str, node: Optional[Any] = None):
        details = {"node": str(node)} if node is not None else {}
        super().__init__(message, "GAME_ERROR", details)


class OutputError(PFedGameError):
    """Exception for report and checkpoint I/O failures."""

    def __init__(self, message: str, path: Optional[str] = None):
        details = {"path": path} if path else {}
        super().__init__(message, "OUTPUT_ERROR", details)


def format_error(error: Exception, include_details: bool = False) -> Dict[str, Any]:
    """Format an error payload for command output."""
    if isinstance(error, PFedGameError):
        response = error.to_dict()
        if not include_details:
            response["error"].pop("details", None)
        return response

    return {
        "error": {
            "code": "INTERNAL_ERROR",
            "message": "An unexpected error occurred",
            "timestamp": datetime.now(timezone.utc).isoformat(),
        }
    }


def exit_code_for(error: Exception) -> int:
    """Map an error to a process exit code."""
    if isinstance(error, ConfigurationError):
        return 2
    return 1
