"""
Centralized error handling utilities for the tracking pipeline.
Provides the exception hierarchy, structured error logging and stage wrapping.
"""

import json
import logging
import time
import traceback
from collections.abc import Callable
from typing import Any, TypeVar
from uuid import uuid4

logger = logging.getLogger(__name__)

T = TypeVar("T")


class PipelineError(Exception):
    """Base class for pipeline errors."""

    def __init__(self, message: str, error_code: str, details: dict[str, Any] | None = None):
        super().__init__(message)
        self.message = message
        self.error_code = error_code
        self.details = details or {}
        self.timestamp = int(time.time())


class ConfigError(PipelineError):
    """Raised when a configuration value or combination is invalid."""

    def __init__(self, message: str, details: dict[str, Any] | None = None):
        super().__init__(message, "CONFIG_INVALID", details)


class DimensionError(PipelineError):
    """Raised when tensor shapes do not fit an operation."""

    def __init__(self, message: str, shapes: list[tuple[int, ...]] | None = None):
        super().__init__(message, "DIMENSION_MISMATCH", {"shapes": [list(s) for s in shapes or []]})


class ContractError(PipelineError):
    """Raised when a caller violates an operation precondition."""

    def __init__(self, message: str, details: dict[str, Any] | None = None):
        super().__init__(message, "CONTRACT_VIOLATION", details)


class MotParseError(PipelineError):
    """Raised when a MOTChallenge row cannot be parsed."""

    def __init__(self, line_number: int, line: str, reason: str):
        super().__init__(
            f"Malformed MOT row at line {line_number}: {reason}",
            "MOT_PARSE",
            {"line_number": line_number, "line": line, "reason": reason},
        )
        self.line_number = line_number


class FrameSequenceError(PipelineError):
    """Raised when a frame directory has missing or unreadable frames."""

    def __init__(self, message: str, missing: list[str] | None = None):
        super().__init__(message, "FRAME_SEQUENCE", {"missing": missing or []})
        self.missing = missing or []


class CheckpointError(PipelineError):
    """Raised when a checkpoint is unreadable or does not fit the configured model."""

    def __init__(
        self,
        message: str,
        expected_shape: tuple[int, ...] | None = None,
        found_shape: tuple[int, ...] | None = None,
    ):
        details: dict[str, Any] = {}
        if expected_shape is not None:
            details["expected_shape"] = list(expected_shape)
        if found_shape is not None:
            details["found_shape"] = list(found_shape)
        super().__init__(message, "CHECKPOINT_INVALID", details)


class MetricUndefinedError(PipelineError):
    """Raised when a metric has a zero denominator."""

    def __init__(self, metric: str, reason: str):
        super().__init__(f"{metric} is undefined: {reason}", "METRIC_UNDEFINED", {"metric": metric})


class TrainingAbortedError(PipelineError):
    """Raised when a training phase cannot continue."""

    def __init__(self, phase: str, epoch: int, diagnostic: str):
        super().__init__(
            f"Training phase '{phase}' aborted at epoch {epoch}: {diagnostic}",
            "TRAINING_ABORTED",
            {"phase": phase, "epoch": epoch, "diagnostic": diagnostic},
        )


class StageError(PipelineError):
    """Raised when a CLI stage fails."""

    def __init__(self, stage: str, original_error: Exception, run_id: str):
        super().__init__(
            f"Stage '{stage}' failed for run {run_id}: {original_error}",
            "STAGE_FAILED",
            {
                "stage": stage,
                "run_id": run_id,
                "original_error": str(original_error),
                "original_error_type": type(original_error).__name__,
            },
        )
        self.original_error = original_error


def create_correlation_id(run_id: str | None = None) -> str:
    """
    Create a correlation ID for log tracing.

    Args:
        run_id: Optional run ID to include in correlation ID

    Returns:
        Correlation ID string
    """
    timestamp = int(time.time())
    if run_id:
        return f"{run_id}_{timestamp}_{str(uuid4())[:8]}"
    return f"req_{timestamp}_{str(uuid4())[:8]}"


def log_event(event_type: str, correlation_id: str | None = None, **fields: Any) -> None:
    """Emit a single-line JSON event at INFO level."""
    event = {"event_type": event_type, "timestamp": int(time.time())}
    if correlation_id:
        event["correlation_id"] = correlation_id
    event.update(fields)
    logger.info(json.dumps(event, default=str))


def log_structured_error(error: Exception, context: dict[str, Any], correlation_id: str | None = None) -> None:
    """
    Log error with structured format.

    Args:
        error: Exception that occurred
        context: Additional context information
        correlation_id: Optional correlation ID for tracing
    """
    error_data: dict[str, Any] = {
        "event_type": "error",
        "timestamp": int(time.time()),
        "correlation_id": correlation_id or create_correlation_id(),
        "error": {
            "type": type(error).__name__,
            "message": str(error),
            "traceback": traceback.format_exc(),
        },
        "context": context,
    }

    if isinstance(error, PipelineError):
        error_data["error"].update({"error_code": error.error_code, "details": error.details})

    logger.error(json.dumps(error_data, default=str))


def run_stage(stage_name: str, stage_func: Callable[..., T], run_id: str, *args: Any, **kwargs: Any) -> T:
    """
    Run a pipeline stage with start/complete events and error wrapping.

    Args:
        stage_name: Name of the stage
        stage_func: Function to execute for this stage
        run_id: Run ID for tracing
        *args: Arguments for stage function
        **kwargs: Keyword arguments for stage function

    Returns:
        Stage function result

    Raises:
        StageError: If the stage raises anything other than a configuration error
        ConfigError, CheckpointError: Passed through so the CLI can map them to usage errors
    """
    correlation_id = create_correlation_id(run_id)
    started = time.perf_counter()
    log_event("stage_start", correlation_id, run_id=run_id, stage=stage_name)

    try:
        result = stage_func(*args, **kwargs)
    except (ConfigError, CheckpointError) as e:
        log_structured_error(e, {"stage": stage_name, "run_id": run_id}, correlation_id)
        raise
    except Exception as e:
        log_structured_error(
            e,
            {
                "stage": stage_name,
                "run_id": run_id,
                "function_name": getattr(stage_func, "__name__", str(stage_func)),
            },
            correlation_id,
        )
        raise StageError(stage_name, e, run_id) from e

    log_event(
        "stage_complete",
        correlation_id,
        run_id=run_id,
        stage=stage_name,
        elapsed_seconds=round(time.perf_counter() - started, 4),
    )
    return result
