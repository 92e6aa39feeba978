"""Error taxonomy shared by the engine, the HTTP service, and the CLI.

Every failure the engine can signal is a WorkbenchError subclass carrying a
stable machine-readable ``code``.  The service maps codes onto HTTP statuses
and the CLI maps them onto exit codes, so the class hierarchy here is the
single source of truth for error identity.
"""

from __future__ import annotations

from typing import Any


class WorkbenchError(Exception):
    """Base class for all engine errors."""

    code: str = "WORKBENCH_ERROR"
    http_status: int = 400

    def __init__(self, message: str, **details: Any) -> None:
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self) -> dict[str, Any]:
        return {"code": self.code, "message": self.message, "details": self.details}


class InvalidValue(WorkbenchError, ValueError):
    """A cell, argument, or config field holds a value outside its domain."""

    code = "INVALID_VALUE"
    http_status = 400


class SchemaMismatch(WorkbenchError):
    code = "SCHEMA_MISMATCH"
    http_status = 400


class EmptyDataset(WorkbenchError):
    code = "EMPTY_DATASET"
    http_status = 400


class UnknownVariable(WorkbenchError):
    code = "UNKNOWN_VARIABLE"
    http_status = 404


class MissingBinSpec(WorkbenchError):
    code = "MISSING_BIN_SPEC"
    http_status = 400


class IndexOutOfRange(WorkbenchError):
    code = "INDEX_OUT_OF_RANGE"
    http_status = 400


class EmptyInput(WorkbenchError):
    code = "EMPTY_INPUT"
    http_status = 400


class AllZeroCounts(WorkbenchError):
    code = "ALL_ZERO_COUNTS"
    http_status = 400


class DegenerateTarget(WorkbenchError):
    code = "DEGENERATE_TARGET"
    http_status = 422


class TooFewRows(WorkbenchError):
    code = "TOO_FEW_ROWS"
    http_status = 422


class TooFewRowsPerClass(WorkbenchError):
    code = "TOO_FEW_ROWS_PER_CLASS"
    http_status = 422


class UnknownCategory(WorkbenchError):
    code = "UNKNOWN_CATEGORY"
    http_status = 400


class InsufficientEligibleSamples(WorkbenchError):
    code = "INSUFFICIENT_ELIGIBLE_SAMPLES"
    http_status = 422


class KTooLarge(WorkbenchError):
    code = "K_TOO_LARGE"
    http_status = 422


class UnannotatedBatch(WorkbenchError):
    code = "UNANNOTATED_BATCH"
    http_status = 409


class UnknownSample(WorkbenchError):
    code = "UNKNOWN_SAMPLE"
    http_status = 404


class IllegalTransition(WorkbenchError):
    code = "ILLEGAL_TRANSITION"
    http_status = 409


class ConstraintViolation(WorkbenchError):
    code = "CONSTRAINT_VIOLATION"
    http_status = 422


class NotFound(WorkbenchError):
    """Unknown resource id; ``code`` is refined per resource kind."""

    code = "NOT_FOUND"
    http_status = 404

    def __init__(self, kind: str, resource_id: str) -> None:
        super().__init__(f"no {kind} with id {resource_id!r}", resource_id=resource_id)
        self.code = f"{kind.upper()}_NOT_FOUND"


class StaleVersion(WorkbenchError):
    code = "STALE_VERSION"
    http_status = 409


class ReplayDivergence(WorkbenchError):
    """A replayed log produced different results than the log records."""

    code = "REPLAY_DIVERGENCE"
    http_status = 409
