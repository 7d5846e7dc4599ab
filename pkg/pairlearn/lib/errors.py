"""Normalized errors shared by every pairlearn layer."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

ErrorCode = Literal[
    "NON_SQUARE",
    "EXCESSIVE_ASYMMETRY",
    "CONVERGENCE_FAILURE",
    "DIMENSION_MISMATCH",
    "DIVISION_BY_NEAR_ZERO",
    "RAGGED_INPUT",
    "NEGATIVE_DISTANCE",
    "ASYMMETRIC_INPUT",
    "INVALID_DISTANCE",
    "NOT_PSD",
    "SIZE_OVERFLOW",
    "ALL_SAME_CLASS",
    "ID_MISMATCH",
    "SINGULAR_SYSTEM",
    "IT_NEW_TASK",
    "ZERO_DIVISOR",
    "INVALID_PARAMETER",
    "DENOMINATOR_UNDERFLOW",
    "NO_TRAINING_DATA",
    "DEGENERATE_CLASSES",
    "NO_VALID_SLICES",
    "NO_COMPARABLE_PAIRS",
    "INVALID_LABELS",
    "PARSE_ERROR",
    "ID_COLLISION",
    "NON_SQUARE_KERNEL",
    "MISSING_ID",
    "IO_FAILURE",
    "UNSUPPORTED_COMBINATION",
    "USAGE",
]
ErrorCategory = Literal["usage", "data", "numeric"]

USAGE_CODES = {"USAGE", "UNSUPPORTED_COMBINATION", "INVALID_PARAMETER"}
NUMERIC_CODES = {
    "CONVERGENCE_FAILURE",
    "DIVISION_BY_NEAR_ZERO",
    "SINGULAR_SYSTEM",
    "ZERO_DIVISOR",
    "DENOMINATOR_UNDERFLOW",
    "SIZE_OVERFLOW",
}


@dataclass
class PairlearnError(Exception):
    code: ErrorCode
    message: str
    detail: str | None = None

    def __str__(self) -> str:
        if self.detail:
            return f"{self.message} ({self.detail})"
        return self.message


def error_category(code: str) -> ErrorCategory:
    if code in USAGE_CODES:
        return "usage"
    if code in NUMERIC_CODES:
        return "numeric"
    return "data"
