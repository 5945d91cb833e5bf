"""Logging utilities for the pFedGame simulator."""

import logging
import sys
import time
from contextlib import contextmanager
from datetime import datetime, timezone
from typing import Any, Dict, Iterator, List, Optional

from app.config import get_settings


def setup_logging(level: Optional[str] = None) -> None:
    """Setup structured logging on stderr; stdout is kept for command output."""
    settings = get_settings()
    log_level = (level or settings.log_level).upper()

    logging.basicConfig(
        level=getattr(logging, log_level),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=[logging.StreamHandler(sys.stderr)],
        force=True,
    )

    logger = logging.getLogger(__name__)
    logger.debug(f"🚀 Logging initialized for {settings.app_name} v{settings.app_version}")


class StructuredLogger:
    """Structured logging utility for consistent log formatting."""

    def __init__(self, logger_name: str):
        self.logger = logging.getLogger(logger_name)

    def _format_extra(self, **kwargs: Any) -> Dict[str, Any]:
        """Format extra fields for structured logging."""
        extra: Dict[str, Any] = {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "service": "pfedgame-simulator",
        }
        extra.update(kwargs)
        return extra

    def info(self, message: str, **kwargs: Any) -> None:
        """Log info message with structured data."""
        self.logger.info(message, extra=self._format_extra(**kwargs))

    def warning(self, message: str, **kwargs: Any) -> None:
        """Log warning message with structured data."""
        self.logger.warning(message, extra=self._format_extra(**kwargs))

    def error(self, message: str, **kwargs: Any) -> None:
        """Log error message with structured data."""
        self.logger.error(message, extra=self._format_extra(**kwargs))

    def debug(self, message: str, **kwargs: Any) -> None:
        """Log debug message with structured data."""
        if self.logger.isEnabledFor(logging.DEBUG):
            self.logger.debug(message, extra=self._format_extra(**kwargs))


def log_performance_metric(operation: str, duration_seconds: float,
                           success: bool = True, **kwargs: Any) -> None:
    """Log performance metrics."""
    logger = StructuredLogger("performance")

    logger.debug(
        f"⏱️ Performance metric: {operation}",
        operation=operation,
        duration_seconds=duration_seconds,
        success=success,
        **kwargs,
    )


class PerformanceMonitor:
    """Keeps recent wall-time samples per operation."""

    def __init__(self) -> None:
        self.metrics: Dict[str, List[Dict[str, Any]]] = {}

    def record_metric(self, operation: str, duration_seconds: float,
                      success: bool = True, **kwargs: Any) -> None:
        """Record a performance metric."""
        samples = self.metrics.setdefault(operation, [])
        samples.append({
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "duration_seconds": duration_seconds,
            "success": success,
            **kwargs,
        })

        # Keep only last 100 metrics per operation
        if len(samples) > 100:
            self.metrics[operation] = samples[-100:]

        log_performance_metric(operation, duration_seconds, success, **kwargs)

    def last_duration(self, operation: str) -> Optional[float]:
        """Duration of the most recent sample for an operation."""
        samples = self.metrics.get(operation)
        if not samples:
            return None
        return float(samples[-1]["duration_seconds"])


# Global performance monitor instance
performance_monitor = PerformanceMonitor()


@contextmanager
def timed_operation(operation: str, **kwargs: Any) -> Iterator[None]:
    """Context manager for timing operations."""
    start_time = time.perf_counter()
    success = False

    try:
        yield
        success = True
    except Exception as e:
        logger = StructuredLogger("performance")
        logger.error(f"❌ Operation {operation} failed: {e}")
        raise
    finally:
        duration = time.perf_counter() - start_time
        performance_monitor.record_metric(operation, duration, success, **kwargs)
