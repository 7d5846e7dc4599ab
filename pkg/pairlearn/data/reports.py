"""Report, model snapshot and learning-curve files."""

from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path
from typing import Any, Sequence, cast

import numpy as np
import pandas as pd

from pairlearn.data.loader import FLOAT_FORMAT, read_matrix_csv, write_matrix_csv
from pairlearn.data.models import EvaluationReport, GridRecord, LearningCurveRow, ReportFormat
from pairlearn.learning.holdout import SuspectDyad
from pairlearn.learning.models import VARIANTS, DualModel
from pairlearn.lib.errors import PairlearnError
from pairlearn.lib.kernels import LabelMatrix

SNAPSHOT_VERSION = 1


def _record(record: GridRecord | None) -> dict[str, Any] | None:
    if record is None:
        return None
    return {
        "lambda_d": record.lambda_d,
        "lambda_t": record.lambda_t,
        "lambda": record.lam,
        "score": record.score,
    }


def report_payload(report: EvaluationReport) -> dict[str, Any]:
    """Report as a dict with the fixed field order used on disk."""
    return {
        "model": report.model,
        "setting": report.setting,
        "metric": report.metric,
        "grid": [_record(item) for item in report.grid],
        "best": _record(report.best),
        "timing_seconds": report.timing_seconds,
        "dataset": {"m": report.m, "q": report.q, "provenance": list(report.provenance)},
    }


def dump_report_json(payload: dict[str, Any]) -> str:
    return json.dumps(payload, indent=2, ensure_ascii=True, allow_nan=False) + "\n"


def _write_text(path: str | Path, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as error:
        raise PairlearnError("IO_FAILURE", f"Cannot write {path}.", detail=str(error)) from error


def write_report(report: EvaluationReport, path: str | Path, fmt: ReportFormat = "json") -> None:
    if fmt == "json":
        _write_text(path, dump_report_json(report_payload(report)))
        return
    if fmt != "csv":
        raise PairlearnError("USAGE", f"Unknown report format: {fmt}")
    best = _record(report.best)
    rows = []
    for record in report.grid:
        fields = cast(dict[str, Any], _record(record))
        rows.append(
            {
                "model": report.model,
                "setting": report.setting,
                "metric": report.metric,
                **fields,
                "best": fields == best,
            }
        )
    frame = pd.DataFrame(rows, columns=["model", "setting", "metric", "lambda_d", "lambda_t", "lambda", "score", "best"])
    try:
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    except OSError as error:
        raise PairlearnError("IO_FAILURE", f"Cannot write {path}.", detail=str(error)) from error


def read_report(path: str | Path) -> dict[str, Any]:
    try:
        return cast(dict[str, Any], json.loads(Path(path).read_text(encoding="utf-8")))
    except OSError as error:
        raise PairlearnError("IO_FAILURE", f"Cannot read {path}.", detail=str(error)) from error
    except json.JSONDecodeError as error:
        raise PairlearnError("PARSE_ERROR", f"Report is not valid JSON: {path}", detail=str(error)) from error


def snapshot_paths(path: str | Path) -> tuple[Path, Path]:
    """(parameter CSV, JSON sidecar) for a snapshot given either file or a bare stem."""
    base = Path(path)
    if base.suffix.lower() in {".json", ".csv"}:
        base = base.with_suffix("")
    return base.with_suffix(".csv"), base.with_suffix(".json")


def write_model_snapshot(model: DualModel, path: str | Path) -> tuple[Path, Path]:
    params_path, sidecar_path = snapshot_paths(path)
    write_matrix_csv(params_path, model.instance_ids, model.task_ids, model.params)
    sidecar = {
        "version": SNAPSHOT_VERSION,
        "variant": model.variant,
        "lambda_d": model.lambda_d,
        "lambda_t": model.lambda_t,
        "lambda": model.lam,
        "params_file": params_path.name,
        "m": model.shape[0],
        "q": model.shape[1],
    }
    _write_text(sidecar_path, json.dumps(sidecar, indent=2, ensure_ascii=True) + "\n")
    return params_path, sidecar_path


def read_model_snapshot(path: str | Path) -> DualModel:
    _, sidecar_path = snapshot_paths(path)
    sidecar = read_report(sidecar_path)
    variant = sidecar.get("variant")
    if variant not in VARIANTS:
        raise PairlearnError("PARSE_ERROR", f"Snapshot has an unknown model variant: {variant}", detail=str(sidecar_path))
    params = cast(LabelMatrix, read_matrix_csv(sidecar_path.parent / str(sidecar.get("params_file", "")), "label"))
    if params.shape != (sidecar.get("m"), sidecar.get("q")):
        raise PairlearnError("PARSE_ERROR", "Snapshot parameter file does not match its sidecar.", detail=str(sidecar_path))
    return DualModel(
        variant=variant,
        params=params.values,
        instance_ids=params.instance_ids,
        task_ids=params.task_ids,
        lambda_d=float(sidecar.get("lambda_d", 0.0)),
        lambda_t=float(sidecar.get("lambda_t", 0.0)),
        lam=float(sidecar.get("lambda", 0.0)),
    )


def write_learning_curve(path: str | Path, rows: Sequence[LearningCurveRow]) -> None:
    frame = pd.DataFrame([asdict(row) for row in rows], columns=["batch", "n_instances", "n_tasks", "metric", "score"])
    try:
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    except OSError as error:
        raise PairlearnError("IO_FAILURE", f"Cannot write {path}.", detail=str(error)) from error


def write_suspects(path: str | Path, suspects: Sequence[SuspectDyad]) -> None:
    frame = pd.DataFrame(
        [asdict(item) for item in suspects],
        columns=["instance_id", "task_id", "label", "loo_value", "residual"],
    )
    try:
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    except OSError as error:
        raise PairlearnError("IO_FAILURE", f"Cannot write {path}.", detail=str(error)) from error


def write_predictions(path: str | Path, instance_ids: Sequence[str], task_ids: Sequence[str], values: np.ndarray) -> None:
    write_matrix_csv(path, instance_ids, task_ids, values)
