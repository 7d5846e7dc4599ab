"""Leave-one-out evaluation and hyperparameter grid search."""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from pairlearn.data.models import DatasetBundle, EvaluationReport, GridRecord
from pairlearn.learning import holdout
from pairlearn.learning.holdout import LooResult, Setting, SuspectDyad
from pairlearn.learning.session import FitSession
from pairlearn.lib.errors import PairlearnError
from pairlearn.lib.filters import hat_matrix
from pairlearn.lib.kernels import LabelMatrix, rescore_labels
from pairlearn.lib.metrics import MetricSpec, parse_metric, score
from pairlearn.services.base import ServiceContext

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class GridSpec:
    lambda_values: tuple[float, ...]
    joint: bool = True

    def __post_init__(self) -> None:
        if not self.lambda_values:
            raise PairlearnError("INVALID_PARAMETER", "Grid needs at least one lambda value.")
        for value in self.lambda_values:
            if not (math.isfinite(value) and value > 0):
                raise PairlearnError("INVALID_PARAMETER", "Grid values must be positive and finite.", detail=str(value))
        if any(b <= a for a, b in zip(self.lambda_values, self.lambda_values[1:])):
            raise PairlearnError("INVALID_PARAMETER", "Grid values must be strictly increasing.")


def parse_grid(text: str, joint: bool = True) -> GridSpec:
    """``low:high:decade`` for powers of ten, or a comma-separated list of values."""
    clean = text.strip()
    try:
        if ":" in clean:
            low_text, high_text, step = (part.strip() for part in clean.split(":"))
            if step != "decade":
                raise PairlearnError("USAGE", f"Unknown grid step: {step}", detail="only 'decade' is supported")
            low_exp = round(math.log10(float(low_text)))
            high_exp = round(math.log10(float(high_text)))
            values = tuple(10.0**exp for exp in range(low_exp, high_exp + 1))
        else:
            values = tuple(sorted({float(part) for part in clean.split(",") if part.strip()}))
    except ValueError as error:
        raise PairlearnError("USAGE", f"Cannot parse grid: {text}", detail=str(error)) from error
    return GridSpec(lambda_values=values, joint=joint)


@dataclass(frozen=True)
class GridPoint:
    lambda_d: float
    lambda_t: float
    lam: float | None


@dataclass
class LooOutcome:
    result: LooResult
    metric: MetricSpec
    score: float
    suspects: list[SuspectDyad]
    timing_seconds: float


def grid_points(variant: str, grid: GridSpec) -> list[GridPoint]:
    values = grid.lambda_values
    if variant == "IT":
        return [GridPoint(value, 0.0, None) for value in values]
    if variant == "KK":
        return [GridPoint(0.0, 0.0, value) for value in values]
    if variant == "TS":
        if grid.joint:
            return [GridPoint(a, b, None) for a in values for b in values]
        return [GridPoint(value, value, None) for value in values]
    raise PairlearnError("UNSUPPORTED_COMBINATION", f"No grid search for {variant}.")


def _truth(spec: MetricSpec, bundle: DatasetBundle, fitted: LabelMatrix) -> np.ndarray:
    """MSE compares against the labels the model was fitted on; ranking metrics use the original labels."""
    return fitted.values if spec.kind == "mse" else bundle.labels.values


def select_best(records: list[GridRecord], metric: MetricSpec) -> GridRecord | None:
    """Best score; ties go to the larger (lambda_d, lambda_t, lambda)."""
    if not records:
        return None
    sign = 1.0 if metric.greater_is_better else -1.0
    return max(records, key=lambda item: (sign * item.score, item.lambda_d, item.lambda_t, item.lam or 0.0))


class EvaluationService:
    def __init__(self, ctx: ServiceContext) -> None:
        self.ctx = ctx

    def _labels(self, bundle: DatasetBundle, rescore: bool) -> LabelMatrix:
        if not bundle.labels.is_complete:
            raise PairlearnError("INVALID_LABELS", "Leave-one-out needs a complete label matrix.")
        return rescore_labels(bundle.labels) if rescore else bundle.labels

    def _evaluate(
        self,
        session: FitSession,
        variant: str,
        setting: Setting,
        point: GridPoint,
        oracle: bool,
        hats: dict[tuple[str, float], np.ndarray] | None = None,
    ) -> LooResult:
        lam = point.lam or 0.0
        if oracle:
            if variant not in ("IT", "KK", "TS"):
                raise PairlearnError("UNSUPPORTED_COMBINATION", f"No leave-one-out oracle for {variant}.")
            return holdout.brute_force_loo(
                variant,  # type: ignore[arg-type]
                setting,
                session.instance_kernel,
                session.task_kernel,
                session.labels,
                lambda_d=point.lambda_d,
                lambda_t=point.lambda_t,
                lam=lam,
                max_dyads=self.ctx.settings.oracle_dyad_cap,
                max_pairs=self.ctx.settings.kron_size_cap,
            )
        hats = hats or {}
        return holdout.shortcut_loo(
            variant,
            setting,
            session.eig_k,
            session.eig_g,
            session.labels,
            lambda_d=point.lambda_d,
            lambda_t=point.lambda_t,
            lam=lam,
            hat_k=hats.get(("k", point.lambda_d)),
            hat_g=hats.get(("g", point.lambda_t)),
        )

    def loo(
        self,
        bundle: DatasetBundle,
        variant: str,
        setting: str,
        lambda_d: float = 1.0,
        lambda_t: float = 1.0,
        lam: float = 1.0,
        metric: str = "auto",
        oracle: bool = False,
        rescore: bool = False,
        suspects: int = 0,
    ) -> LooOutcome:
        started = time.perf_counter()
        variant = variant.upper()
        clean_setting = holdout.check_setting(setting)
        spec = parse_metric(metric, clean_setting)
        labels = self._labels(bundle, rescore)
        session = FitSession(bundle.instance_kernel, bundle.task_kernel, labels, cache=self.ctx.cache)
        point = GridPoint(lambda_d, lambda_t if variant == "TS" else 0.0, lam if variant == "KK" else None)
        result = self._evaluate(session, variant, clean_setting, point, oracle)
        value = score(spec, _truth(spec, bundle, labels), result.predictions)
        flagged = holdout.suspect_dyads(labels, result, suspects) if suspects else []
        LOGGER.info("loo scored: variant=%s setting=%s metric=%s score=%.6g", variant, clean_setting, spec.kind, value)
        return LooOutcome(result, spec, value, flagged, time.perf_counter() - started)

    def grid(
        self,
        bundle: DatasetBundle,
        variant: str,
        setting: str,
        grid: GridSpec,
        metric: str = "auto",
        oracle: bool = False,
        rescore: bool = False,
    ) -> EvaluationReport:
        """Score every grid point from one pair of decompositions; records sorted by (lambda_d, lambda_t, lambda)."""
        started = time.perf_counter()
        variant = variant.upper()
        clean_setting = holdout.check_setting(setting)
        spec = parse_metric(metric, clean_setting)
        labels = self._labels(bundle, rescore)
        points = grid_points(variant, grid)
        session = FitSession(bundle.instance_kernel, bundle.task_kernel, labels, cache=self.ctx.cache)
        hats: dict[tuple[str, float], np.ndarray] = {}
        if not oracle:
            eig_k, eig_g = session.eig_k, session.eig_g
            if variant == "IT" or (variant == "TS" and clean_setting != "A"):
                for point in points:
                    if ("k", point.lambda_d) not in hats:
                        hats[("k", point.lambda_d)] = hat_matrix(eig_k, point.lambda_d)
                    if variant == "TS" and ("g", point.lambda_t) not in hats:
                        hats[("g", point.lambda_t)] = hat_matrix(eig_g, point.lambda_t)

        def run(point: GridPoint) -> GridRecord:
            result = self._evaluate(session, variant, clean_setting, point, oracle, hats)
            value = score(spec, _truth(spec, bundle, labels), result.predictions)
            LOGGER.debug("grid point scored: lambda_d=%g lambda_t=%g lambda=%s score=%.6g", point.lambda_d, point.lambda_t, point.lam, value)
            return GridRecord(lambda_d=point.lambda_d, lambda_t=point.lambda_t, lam=point.lam, score=value)

        workers = max(1, min(self.ctx.settings.threads, len(points)))
        if workers == 1:
            records = [run(point) for point in points]
        else:
            with ThreadPoolExecutor(max_workers=workers) as executor:
                records = list(executor.map(run, points))
        records.sort(key=lambda item: (item.lambda_d, item.lambda_t, item.lam or 0.0))
        best = select_best(records, spec)
        LOGGER.info("grid finished: variant=%s setting=%s points=%s workers=%s", variant, clean_setting, len(records), workers)
        m, q = bundle.shape
        return EvaluationReport(
            model=variant.lower(),
            setting=clean_setting,
            metric=spec.label,
            grid=records,
            best=best,
            timing_seconds=time.perf_counter() - started,
            m=m,
            q=q,
            provenance=[item.path for item in bundle.provenance],
        )
