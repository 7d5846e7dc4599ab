"""Mini-batch streaming of instances or tasks through the primal two-step model."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Literal

import numpy as np

from pairlearn.data.loader import align_features
from pairlearn.data.models import LearningCurveRow
from pairlearn.learning import online
from pairlearn.learning.online import PrimalModel
from pairlearn.lib.errors import PairlearnError
from pairlearn.lib.kernels import FeatureMatrix, LabelMatrix
from pairlearn.lib.metrics import MetricSpec, parse_metric, score
from pairlearn.services.base import ServiceContext

LOGGER = logging.getLogger(__name__)
Stream = Literal["instances", "tasks"]


@dataclass
class OnlineRequest:
    lambda_d: float = 1.0
    lambda_t: float = 1.0
    batch_size: int = 1000
    stream: Stream = "instances"
    test_fraction: float = 0.2
    seed: int = 0
    metric: str = "auto"


@dataclass
class OnlineOutcome:
    model: PrimalModel
    curve: list[LearningCurveRow]
    metric: MetricSpec
    batch_gap: float
    n_test: int


def _split(count: int, test_fraction: float, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    if not 0.0 < test_fraction < 1.0:
        raise PairlearnError("INVALID_PARAMETER", "test fraction must lie strictly between 0 and 1.")
    order = rng.permutation(count)
    n_test = max(1, int(round(test_fraction * count)))
    if count - n_test < 1:
        raise PairlearnError("NO_TRAINING_DATA", f"Holding out {n_test} of {count} leaves nothing to train on.")
    return order[n_test:], order[:n_test]


def _relative_gap(left: np.ndarray, right: np.ndarray) -> float:
    scale = float(np.max(np.abs(right))) if right.size else 0.0
    return float(np.max(np.abs(left - right))) / scale if scale > 0 else float(np.max(np.abs(left - right), initial=0.0))


class OnlineService:
    def __init__(self, ctx: ServiceContext) -> None:
        self.ctx = ctx

    def run(
        self,
        instance_features: FeatureMatrix,
        task_features: FeatureMatrix,
        labels: LabelMatrix,
        request: OnlineRequest,
    ) -> OnlineOutcome:
        """Initialise on the first batch, update per batch and score a fixed held-out split after each one."""
        if request.batch_size < 1:
            raise PairlearnError("INVALID_PARAMETER", "batch size must be at least 1.")
        if request.stream not in ("instances", "tasks"):
            raise PairlearnError("USAGE", f"Unknown stream: {request.stream}")
        if not labels.is_complete:
            raise PairlearnError("INVALID_LABELS", "Online updates need a complete label matrix.")
        phi = align_features(instance_features, labels.instance_ids, "Instance")
        psi = align_features(task_features, labels.task_ids, "Task")
        values = labels.values
        by_instances = request.stream == "instances"
        spec = parse_metric(request.metric, "B" if by_instances else "C")
        rng = np.random.default_rng(request.seed)
        train, test = _split(values.shape[0] if by_instances else values.shape[1], request.test_fraction, rng)
        batches = [train[start : start + request.batch_size] for start in range(0, train.size, request.batch_size)]

        model: PrimalModel | None = None
        curve: list[LearningCurveRow] = []
        for number, batch in enumerate(batches, start=1):
            if by_instances:
                if model is None:
                    model = online.init_primal(phi[batch], psi, values[batch], request.lambda_d, request.lambda_t)
                else:
                    model = online.update_instances(model, phi[batch], values[batch])
                predictions = online.predict_primal_matrix(model, phi[test], psi)
                truth = values[test]
            else:
                if model is None:
                    model = online.init_primal(phi, psi[batch], values[:, batch], request.lambda_d, request.lambda_t)
                else:
                    model = online.update_tasks(model, psi[batch], values[:, batch])
                predictions = online.predict_primal_matrix(model, phi, psi[test])
                truth = values[:, test]
            value = score(spec, truth, predictions)
            curve.append(LearningCurveRow(number, model.n_instances, model.n_tasks, spec.label, value))
            LOGGER.info("online batch scored: batch=%s instances=%s tasks=%s score=%.6g", number, model.n_instances, model.n_tasks, value)

        assert model is not None
        seen = np.concatenate(batches)
        if by_instances:
            reference = online.init_primal(phi[seen], psi, values[seen], request.lambda_d, request.lambda_t)
        else:
            reference = online.init_primal(phi, psi[seen], values[:, seen], request.lambda_d, request.lambda_t)
        gap = _relative_gap(model.weights, reference.weights)
        if gap > 1e-6:
            LOGGER.warning("online weights drifted from batch solution: relative_gap=%.3e", gap)
        return OnlineOutcome(model=model, curve=curve, metric=spec, batch_gap=gap, n_test=int(test.size))
