"""
Structured logging configuration for qdesigns.

All log records are JSON lines on stderr; stdout is reserved for command
output so that reports stay byte-identical between runs.
"""

import logging
import sys
import time
from contextlib import contextmanager
from functools import wraps
from typing import Any, Dict, Optional

import structlog
from structlog.stdlib import LoggerFactory

_PROCESSORS = [
    structlog.stdlib.filter_by_level,
    structlog.stdlib.add_logger_name,
    structlog.stdlib.add_log_level,
    structlog.stdlib.PositionalArgumentsFormatter(),
    structlog.processors.TimeStamper(fmt="iso"),
    structlog.processors.StackInfoRenderer(),
    structlog.processors.format_exc_info,
    structlog.processors.UnicodeDecoder(),
    structlog.processors.JSONRenderer(sort_keys=True),
]

structlog.configure(
    processors=_PROCESSORS,
    context_class=dict,
    logger_factory=LoggerFactory(),
    wrapper_class=structlog.stdlib.BoundLogger,
    cache_logger_on_first_use=True,
)


class StructuredLogger:
    """Structured logger with performance tracking."""

    def __init__(self, name: str):
        self.logger = structlog.get_logger(name)
        self.name = name

    def info(self, message: str, **kwargs):
        self.logger.info(message, **kwargs)

    def debug(self, message: str, **kwargs):
        self.logger.debug(message, **kwargs)

    def warning(self, message: str, **kwargs):
        self.logger.warning(message, **kwargs)

    def error(self, message: str, error: Optional[Exception] = None, **kwargs):
        """Log error message, attaching the exception type and text when given."""
        log_data = kwargs.copy()
        if error:
            log_data.update({
                "error_type": type(error).__name__,
                "error_message": str(error),
            })
        self.logger.error(message, **log_data)

    def critical(self, message: str, error: Optional[Exception] = None, **kwargs):
        log_data = kwargs.copy()
        if error:
            log_data.update({
                "error_type": type(error).__name__,
                "error_message": str(error),
            })
        self.logger.critical(message, **log_data)

    @contextmanager
    def track_performance(self, operation_name: str, **context):
        """Log the wall-clock duration of the enclosed block."""
        start_time = time.perf_counter()
        success = True
        try:
            yield
        except Exception:
            success = False
            raise
        finally:
            duration = time.perf_counter() - start_time
            self.logger.info(
                "operation_completed" if success else "operation_failed",
                operation=operation_name,
                duration_ms=round(duration * 1000, 2),
                success=success,
                **context,
            )


logging.basicConfig(
    format="%(message)s",
    stream=sys.stderr,
    level=logging.WARNING,
)


def get_logger(name: str) -> StructuredLogger:
    """Get a structured logger for a specific component."""
    return StructuredLogger(name)


LOG_LEVELS = {
    "development": logging.DEBUG,
    "staging": logging.INFO,
    "production": logging.WARNING,
}


def configure_log_level(environment: str = "production"):
    """Configure log level based on environment."""
    level = LOG_LEVELS.get(environment, logging.INFO)
    logging.getLogger().setLevel(level)


def log_performance(operation_name: str):
    """Decorator to log performance of functions."""
    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            start_time = time.perf_counter()
            logger = get_logger(func.__module__)
            try:
                result = func(*args, **kwargs)
            except Exception as e:
                logger.error(
                    "function_failed",
                    error=e,
                    function=func.__name__,
                    operation=operation_name,
                    duration_ms=round((time.perf_counter() - start_time) * 1000, 2),
                )
                raise
            logger.debug(
                "function_completed",
                function=func.__name__,
                operation=operation_name,
                duration_ms=round((time.perf_counter() - start_time) * 1000, 2),
            )
            return result
        return wrapper
    return decorator


class ErrorTracker:
    """Count errors by type for the end-of-run summary."""

    def __init__(self):
        self.error_count = 0
        self.error_types: Dict[str, int] = {}

    def track_error(self, error: Exception, context: Dict[str, Any] = None):
        self.error_count += 1
        error_type = type(error).__name__
        self.error_types[error_type] = self.error_types.get(error_type, 0) + 1
        get_logger("error_tracker").error(
            "error_occurred",
            error_type=error_type,
            error_message=str(error),
            error_count=self.error_count,
            context=context or {},
        )

    def get_error_stats(self) -> Dict[str, Any]:
        return {
            "total_errors": self.error_count,
            "error_types": dict(self.error_types),
        }


# Global error tracker
error_tracker = ErrorTracker()
