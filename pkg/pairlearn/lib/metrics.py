"""Evaluation measures: mean squared error, micro/macro AUC and concordance index."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy import typing as npt
from scipy.stats import rankdata

from pairlearn.lib.errors import PairlearnError

LOGGER = logging.getLogger(__name__)
MetricKind = Literal["mse", "micro_auc", "macro_auc_rows", "macro_auc_cols", "c_index"]
METRIC_KINDS: tuple[MetricKind, ...] = ("mse", "micro_auc", "macro_auc_rows", "macro_auc_cols", "c_index")
AUTO_METRICS: dict[str, MetricKind] = {
    "A": "micro_auc",
    "B": "macro_auc_rows",
    "C": "macro_auc_cols",
    "D": "micro_auc",
}


@dataclass(frozen=True)
class MetricSpec:
    kind: MetricKind
    tie_policy: Literal["half_credit"] = "half_credit"

    @property
    def greater_is_better(self) -> bool:
        return self.kind != "mse"

    @property
    def label(self) -> str:
        return self.kind.replace("_", "-")


def parse_metric(name: str, setting: str | None = None) -> MetricSpec:
    """CLI metric name (dashes or underscores); ``auto`` picks the setting's default."""
    clean = name.strip().lower().replace("-", "_")
    if clean == "auto":
        if setting is None:
            raise PairlearnError("USAGE", "metric=auto needs a setting.")
        return metric_for_setting(setting)
    if clean not in METRIC_KINDS:
        raise PairlearnError("USAGE", f"Unknown metric: {name}", detail=", ".join(METRIC_KINDS))
    return MetricSpec(kind=clean)  # type: ignore[arg-type]


def metric_for_setting(setting: str) -> MetricSpec:
    kind = AUTO_METRICS.get(setting.strip().upper())
    if kind is None:
        raise PairlearnError("USAGE", f"Unknown setting: {setting}")
    return MetricSpec(kind=kind)


def _same_shape(truth: npt.ArrayLike, scores: npt.ArrayLike) -> tuple[np.ndarray, np.ndarray]:
    left = np.asarray(truth, dtype=np.float64)
    right = np.asarray(scores, dtype=np.float64)
    if left.shape != right.shape:
        raise PairlearnError("DIMENSION_MISMATCH", f"Shapes differ: {left.shape} vs {right.shape}.")
    return left, right


def _binary(truth: np.ndarray) -> np.ndarray:
    if not np.all(np.isin(truth, (0.0, 1.0))):
        raise PairlearnError("INVALID_LABELS", "AUC needs binary {0, 1} truth values.")
    return truth == 1.0


def _auc(positive: np.ndarray, scores: np.ndarray) -> float | None:
    n_pos = int(positive.sum())
    n_neg = positive.size - n_pos
    if n_pos == 0 or n_neg == 0:
        return None
    ranks = rankdata(scores)
    wins = float(ranks[positive].sum()) - n_pos * (n_pos + 1) / 2.0
    return wins / (n_pos * n_neg)


def mse(truth: npt.ArrayLike, predictions: npt.ArrayLike) -> float:
    left, right = _same_shape(truth, predictions)
    if left.size == 0:
        return 0.0
    return float(np.mean((left - right) ** 2))


def micro_auc(truth: npt.ArrayLike, scores: npt.ArrayLike) -> float:
    """AUC over all dyads pooled; ties in score count one half."""
    left, right = _same_shape(truth, scores)
    value = _auc(_binary(left).reshape(-1), right.reshape(-1))
    if value is None:
        raise PairlearnError("DEGENERATE_CLASSES", "AUC needs at least one positive and one negative.")
    return value


def macro_auc(truth: npt.ArrayLike, scores: npt.ArrayLike, axis: Literal["rows", "cols"]) -> float:
    """Unweighted mean of per-row or per-column AUCs over slices holding both classes."""
    left, right = _same_shape(truth, scores)
    if left.ndim != 2:
        raise PairlearnError("DIMENSION_MISMATCH", "Macro AUC needs a label matrix.")
    if axis not in ("rows", "cols"):
        raise PairlearnError("INVALID_PARAMETER", f"Unknown axis: {axis}")
    positive = _binary(left)
    if axis == "cols":
        positive, right = positive.T, right.T
    values = [_auc(positive[idx], right[idx]) for idx in range(positive.shape[0])]
    valid = [value for value in values if value is not None]
    skipped = len(values) - len(valid)
    if not valid:
        raise PairlearnError("NO_VALID_SLICES", f"No {axis[:-1]} contains both classes.")
    if skipped:
        LOGGER.warning("macro auc skipped degenerate slices: axis=%s skipped=%s used=%s", axis, skipped, len(valid))
    return float(np.mean(valid))


def c_index(y: npt.ArrayLike, f: npt.ArrayLike) -> float:
    """Fraction of pairs with y_i > y_j ordered the same way by f; ties in f count one half."""
    truth = np.asarray(y, dtype=np.float64).reshape(-1)
    scores = np.asarray(f, dtype=np.float64).reshape(-1)
    if truth.shape != scores.shape:
        raise PairlearnError("DIMENSION_MISMATCH", f"Shapes differ: {truth.shape} vs {scores.shape}.")
    score_rank = rankdata(scores, method="dense").astype(np.int64)
    tree = np.zeros(int(score_rank.max(initial=0)) + 1, dtype=np.int64)

    def count_below(rank: int) -> int:
        total = 0
        while rank > 0:
            total += int(tree[rank])
            rank -= rank & -rank
        return total

    def insert(rank: int) -> None:
        while rank < tree.size:
            tree[rank] += 1
            rank += rank & -rank

    order = np.argsort(truth, kind="stable")
    concordant = 0.0
    comparable = 0
    inserted = 0
    start = 0
    while start < order.size:
        stop = start
        while stop < order.size and truth[order[stop]] == truth[order[start]]:
            stop += 1
        group = order[start:stop]
        for idx in group:
            rank = int(score_rank[idx])
            below = count_below(rank - 1)
            tied = count_below(rank) - below
            concordant += below + 0.5 * tied
        comparable += group.size * inserted
        for idx in group:
            insert(int(score_rank[idx]))
        inserted += group.size
        start = stop
    if comparable == 0:
        raise PairlearnError("NO_COMPARABLE_PAIRS", "C-index needs at least two distinct labels.")
    return concordant / comparable


def score(spec: MetricSpec, truth: npt.ArrayLike, predictions: npt.ArrayLike) -> float:
    if spec.kind == "mse":
        return mse(truth, predictions)
    if spec.kind == "micro_auc":
        return micro_auc(truth, predictions)
    if spec.kind == "macro_auc_rows":
        return macro_auc(truth, predictions, "rows")
    if spec.kind == "macro_auc_cols":
        return macro_auc(truth, predictions, "cols")
    left, right = _same_shape(truth, predictions)
    return c_index(left.reshape(-1), right.reshape(-1))
