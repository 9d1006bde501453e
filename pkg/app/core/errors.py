"""Domain errors and CLI exit mapping."""

from __future__ import annotations

from typing import Any


class DomainError(Exception):
    """Base class for domain-level failures."""

    error_code = "DOMAIN_ERROR"
    exit_code = 1


class PrecisionExhaustedError(DomainError):
    error_code = "PRECISION_EXHAUSTED"
    exit_code = 3


class DimensionMismatchError(DomainError):
    error_code = "DIMENSION_MISMATCH"


class UnsupportedCoordinateError(DomainError):
    error_code = "UNSUPPORTED_COORDINATE"


class NotEnumerableError(DomainError):
    error_code = "NOT_ENUMERABLE"


class NonIntegerPointError(DomainError):
    error_code = "NON_INTEGER_POINT"


class UnboundedPolytopeError(DomainError):
    error_code = "UNBOUNDED_POLYTOPE"


class BudgetExceededError(DomainError):
    error_code = "BUDGET_EXCEEDED"


class RamseyValueUnavailableError(DomainError):
    error_code = "RAMSEY_VALUE_UNAVAILABLE"


class InvalidDescriptorError(DomainError):
    error_code = "INVALID_DESCRIPTOR"


class UndecidableError(DomainError):
    error_code = "UNDECIDABLE"
    exit_code = 3


class FileFormatError(DomainError):
    error_code = "FILE_FORMAT"


class UnsupportedDimensionError(DomainError):
    error_code = "UNSUPPORTED_DIMENSION"


def domain_error_to_exit(error: DomainError) -> tuple[int, dict[str, Any]]:
    """Map domain exceptions to a process exit code and an error payload."""

    return error.exit_code, {
        "code": error.error_code,
        "message": str(error),
    }
