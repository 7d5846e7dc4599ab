"""Model fitting, snapshot and prediction service."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import cast

import numpy as np

from pairlearn.data import reports
from pairlearn.data.loader import read_matrix_csv
from pairlearn.data.models import DatasetBundle, EvaluationReport, GridRecord
from pairlearn.learning import models
from pairlearn.learning.models import DualModel
from pairlearn.learning.session import FitSession
from pairlearn.lib.errors import PairlearnError
from pairlearn.lib.kernels import FeatureMatrix, LabelMatrix, rescore_labels
from pairlearn.lib.metrics import mse
from pairlearn.services.base import ServiceContext

LOGGER = logging.getLogger(__name__)


@dataclass
class FitRequest:
    variant: str
    lambda_d: float = 1.0
    lambda_t: float = 1.0
    lam: float = 1.0
    rescore: bool = False
    impute: bool = False


@dataclass
class FitOutcome:
    model: DualModel
    training_mse: float
    imputed_cells: int
    timing_seconds: float
    labels: LabelMatrix


@dataclass
class PredictionOutcome:
    instance_ids: tuple[str, ...]
    task_ids: tuple[str, ...]
    values: np.ndarray


def _reorder_columns(matrix: FeatureMatrix, wanted: tuple[str, ...], what: str) -> np.ndarray:
    position = {item: idx for idx, item in enumerate(matrix.columns)}
    for item in wanted:
        if item not in position:
            raise PairlearnError("MISSING_ID", f"{what} test kernel lacks a column for training id {item}.", detail=item)
    return matrix.values[:, [position[item] for item in wanted]]


class TrainingService:
    def __init__(self, ctx: ServiceContext) -> None:
        self.ctx = ctx

    def fit(self, bundle: DatasetBundle, request: FitRequest) -> FitOutcome:
        started = time.perf_counter()
        variant = request.variant.upper()
        if variant not in models.VARIANTS:
            raise PairlearnError("USAGE", f"Unknown model: {request.variant}", detail="expected it, kk, okkls or ts")
        labels = bundle.labels
        imputed = int(np.isnan(labels.values).sum())
        if imputed:
            if not request.impute:
                raise PairlearnError("INVALID_LABELS", "Label file has missing cells; pass --impute to fill them first.")
            labels = models.impute_labels(bundle.instance_kernel, bundle.task_kernel, labels, request.lambda_d, request.lambda_t)
        if request.rescore:
            labels = rescore_labels(labels)
        session = FitSession(bundle.instance_kernel, bundle.task_kernel, labels, cache=self.ctx.cache)
        if variant == "IT":
            model = session.fit_it(request.lambda_d)
        elif variant == "KK":
            model = session.fit_kk(request.lam)
        elif variant == "OKKLS":
            model = session.fit_okkls()
        else:
            model = session.fit_ts(request.lambda_d, request.lambda_t)
        training_mse = mse(labels.values, session.training_predictions(model))
        LOGGER.info("model fitted: variant=%s m=%s q=%s training_mse=%.6g", variant, *model.shape, training_mse)
        return FitOutcome(
            model=model,
            training_mse=training_mse,
            imputed_cells=imputed,
            timing_seconds=time.perf_counter() - started,
            labels=labels,
        )

    def save(self, bundle: DatasetBundle, outcome: FitOutcome, output: str | Path) -> tuple[Path, Path, Path]:
        """Write the snapshot (parameter CSV + sidecar) and a fit report next to it."""
        params_path, sidecar_path = reports.write_model_snapshot(outcome.model, output)
        model = outcome.model
        record = GridRecord(
            lambda_d=model.lambda_d,
            lambda_t=model.lambda_t,
            lam=model.lam if model.variant in ("KK", "OKKLS") else None,
            score=outcome.training_mse,
        )
        report = EvaluationReport(
            model=model.variant.lower(),
            setting="A",
            metric="mse",
            grid=[record],
            best=record,
            timing_seconds=outcome.timing_seconds,
            m=model.shape[0],
            q=model.shape[1],
            provenance=[item.path for item in bundle.provenance],
        )
        report_path = params_path.with_name(params_path.stem + ".report.json")
        reports.write_report(report, report_path, "json")
        return params_path, sidecar_path, report_path

    def write_imputed(self, outcome: FitOutcome, output: str | Path) -> None:
        reports.write_predictions(output, outcome.labels.instance_ids, outcome.labels.task_ids, outcome.labels.values)

    def predict(
        self,
        model_file: str | Path,
        instance_test_kernel: str | Path,
        task_test_kernel: str | Path | None = None,
    ) -> PredictionOutcome:
        """Predict from a saved snapshot; test kernels have test ids as rows and training ids as columns."""
        model = reports.read_model_snapshot(model_file)
        k_file = cast(FeatureMatrix, read_matrix_csv(instance_test_kernel, "feature"))
        k_test = _reorder_columns(k_file, model.instance_ids, "Instance")
        if task_test_kernel is None:
            if model.variant != "IT":
                raise PairlearnError("USAGE", f"{model.variant} predictions need --task-kernel with test-vs-train values.")
            values = models.predict(model, k_test)
            return PredictionOutcome(k_file.ids, model.task_ids, values)
        g_file = cast(FeatureMatrix, read_matrix_csv(task_test_kernel, "feature"))
        if model.variant == "IT":
            values = models.predict(model, k_test, models.task_selector(model, g_file.ids))
        else:
            values = models.predict(model, k_test, _reorder_columns(g_file, model.task_ids, "Task"))
        return PredictionOutcome(k_file.ids, g_file.ids, values)
