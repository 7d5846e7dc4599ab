"""Matrix CSV validation logic."""

from __future__ import annotations

import math

import pandas as pd

from pairlearn.data.models import MatrixKind, ValidationIssue

HEADER_CORNERS = {"", "id"}


def _duplicates(values: list[str]) -> list[str]:
    seen: set[str] = set()
    repeated: list[str] = []
    for value in values:
        if value in seen and value not in repeated:
            repeated.append(value)
        seen.add(value)
    return repeated


def _parse_cell(raw: object, allow_missing: bool) -> tuple[float | None, str | None]:
    if not isinstance(raw, str):
        return None, "missing_cell"
    text = raw.strip()
    if text == "":
        return (math.nan, None) if allow_missing else (None, "empty_cell")
    try:
        value = float(text)
    except ValueError:
        return None, "invalid_number"
    if math.isnan(value) and allow_missing:
        return value, None
    if not math.isfinite(value):
        return None, "invalid_number"
    return value, None


def validate_matrix_frame(
    frame: pd.DataFrame,
    kind: MatrixKind,
    allow_missing: bool = False,
) -> tuple[list[ValidationIssue], list[list[float]]]:
    """Check a raw string frame (header row included) and return issues plus parsed values.

    Row numbers in issues are 1-based file lines.
    """
    issues: list[ValidationIssue] = []
    if frame.empty or frame.shape[1] < 2:
        issues.append(ValidationIssue(field="header", code="missing_header", message="File needs a header and at least one column."))
        return issues, []

    header = [str(cell).strip() if isinstance(cell, str) else "" for cell in frame.iloc[0].tolist()]
    if header[0].lower() not in HEADER_CORNERS:
        issues.append(
            ValidationIssue(field="header", row=1, code="invalid_header", message="First header cell must be blank or 'id'.")
        )
    column_ids = header[1:]
    if any(not item for item in column_ids):
        issues.append(ValidationIssue(field="header", row=1, code="empty_id", message="Column ids must be non-empty."))
    for repeated in _duplicates(column_ids):
        issues.append(ValidationIssue(field=repeated, row=1, code="duplicate_id", message=f"Duplicate column id: {repeated}"))

    row_ids: list[str] = []
    parsed: list[list[float]] = []
    for idx in range(1, frame.shape[0]):
        line = idx + 1
        cells = frame.iloc[idx].tolist()
        row_id = cells[0].strip() if isinstance(cells[0], str) else ""
        if not row_id:
            issues.append(ValidationIssue(field="id", row=line, code="empty_id", message="Row id must be non-empty."))
        row_ids.append(row_id)
        values: list[float] = []
        for col, raw in enumerate(cells[1:], start=1):
            value, problem = _parse_cell(raw, allow_missing and kind == "label")
            if problem is not None:
                issues.append(
                    ValidationIssue(
                        field=column_ids[col - 1] if col - 1 < len(column_ids) else f"column {col + 1}",
                        row=line,
                        code=problem,
                        message=f"Cell at line {line}, column {col + 1} is not a valid number.",
                    )
                )
                value = math.nan
            values.append(float(value) if value is not None else math.nan)
        parsed.append(values)
    for repeated in _duplicates(row_ids):
        issues.append(ValidationIssue(field=repeated, code="duplicate_id", message=f"Duplicate row id: {repeated}"))
    if not row_ids:
        issues.append(ValidationIssue(field="rows", code="no_rows", message="File has a header but no data rows."))
    return issues, parsed
