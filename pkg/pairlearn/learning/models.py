"""Dual kernel ridge regression variants for dyadic data: IT, KK, OKKLS and TS."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy import typing as npt

from pairlearn.lib.errors import PairlearnError
from pairlearn.lib.filters import FilterSpec, apply_filter, filter_grid, kronecker_tikhonov, tikhonov, two_step
from pairlearn.lib.kernels import KernelMatrix, LabelMatrix, kernel_decomposition, make_labels
from pairlearn.lib.linalg import EigenDecomposition, as_matrix

LOGGER = logging.getLogger(__name__)
Variant = Literal["IT", "KK", "OKKLS", "TS"]
VARIANTS: tuple[Variant, ...] = ("IT", "KK", "OKKLS", "TS")


@dataclass(frozen=True)
class DualModel:
    variant: Variant
    params: np.ndarray
    instance_ids: tuple[str, ...]
    task_ids: tuple[str, ...]
    lambda_d: float = 0.0
    lambda_t: float = 0.0
    lam: float = 0.0

    @property
    def shape(self) -> tuple[int, int]:
        return int(self.params.shape[0]), int(self.params.shape[1])


def check_alignment(labels: LabelMatrix, instance_kernel: KernelMatrix, task_kernel: KernelMatrix | None = None) -> None:
    if instance_kernel.ids != labels.instance_ids:
        raise PairlearnError(
            "ID_MISMATCH",
            "Instance kernel ids do not match label rows.",
            detail=_first_difference(instance_kernel.ids, labels.instance_ids),
        )
    if task_kernel is not None and task_kernel.ids != labels.task_ids:
        raise PairlearnError(
            "ID_MISMATCH",
            "Task kernel ids do not match label columns.",
            detail=_first_difference(task_kernel.ids, labels.task_ids),
        )
    if not labels.is_complete:
        raise PairlearnError("INVALID_LABELS", "Fitting needs a complete label matrix; impute missing cells first.")


def _first_difference(left: tuple[str, ...], right: tuple[str, ...]) -> str:
    for a, b in zip(left, right):
        if a != b:
            return f"{a} != {b}"
    return f"{len(left)} ids vs {len(right)} ids"


def _require_rank(decomposition: EigenDecomposition, lam: float, which: str) -> None:
    if lam == 0 and decomposition.size and not decomposition.is_full_rank:
        raise PairlearnError(
            "SINGULAR_SYSTEM",
            f"{which} kernel is rank deficient and the regularization is zero.",
            detail=f"min eigenvalue {float(decomposition.values.min()):.3e}",
        )


def _filtered_solve(eig_k: EigenDecomposition, eig_g: EigenDecomposition, spec: FilterSpec, labels: np.ndarray) -> np.ndarray:
    u, v = eig_k.vectors, eig_g.vectors
    return u @ (filter_grid(spec, eig_k, eig_g) * (u.T @ labels @ v)) @ v.T


def fit_it(
    instance_kernel: KernelMatrix,
    labels: LabelMatrix,
    lambda_d: float,
    eig_k: EigenDecomposition | None = None,
) -> DualModel:
    """Independent-task KRR: (K + lambda_d I) A = Y."""
    check_alignment(labels, instance_kernel)
    spec = tikhonov(lambda_d)
    eig_k = kernel_decomposition(instance_kernel) if eig_k is None else eig_k
    _require_rank(eig_k, lambda_d, "Instance")
    u = eig_k.vectors
    params = (u * apply_filter(spec, eig_k.values)) @ (u.T @ labels.values)
    return DualModel("IT", params, labels.instance_ids, labels.task_ids, lambda_d=lambda_d)


def fit_kk(
    instance_kernel: KernelMatrix,
    task_kernel: KernelMatrix,
    labels: LabelMatrix,
    lam: float,
    eig_k: EigenDecomposition | None = None,
    eig_g: EigenDecomposition | None = None,
) -> DualModel:
    """Kronecker KRR: (G kron K + lam I) vec(A) = vec(Y), solved in the joint eigenbasis."""
    check_alignment(labels, instance_kernel, task_kernel)
    eig_k = kernel_decomposition(instance_kernel) if eig_k is None else eig_k
    eig_g = kernel_decomposition(task_kernel) if eig_g is None else eig_g
    if lam == 0:
        _require_rank(eig_k, 0.0, "Instance")
        _require_rank(eig_g, 0.0, "Task")
    params = _filtered_solve(eig_k, eig_g, kronecker_tikhonov(lam), labels.values)
    return DualModel("KK", params, labels.instance_ids, labels.task_ids, lam=lam)


def fit_okkls(
    instance_kernel: KernelMatrix,
    task_kernel: KernelMatrix,
    labels: LabelMatrix,
    eig_k: EigenDecomposition | None = None,
    eig_g: EigenDecomposition | None = None,
) -> DualModel:
    """Ordinary Kronecker least squares; pass shifted kernels to fit with the Upsilon kernel."""
    model = fit_kk(instance_kernel, task_kernel, labels, 0.0, eig_k=eig_k, eig_g=eig_g)
    return DualModel("OKKLS", model.params, model.instance_ids, model.task_ids)


def fit_ts(
    instance_kernel: KernelMatrix,
    task_kernel: KernelMatrix,
    labels: LabelMatrix,
    lambda_d: float,
    lambda_t: float,
    eig_k: EigenDecomposition | None = None,
    eig_g: EigenDecomposition | None = None,
) -> DualModel:
    """Two-step KRR: A = (K + lambda_d I)^-1 Y (G + lambda_t I)^-1."""
    check_alignment(labels, instance_kernel, task_kernel)
    eig_k = kernel_decomposition(instance_kernel) if eig_k is None else eig_k
    eig_g = kernel_decomposition(task_kernel) if eig_g is None else eig_g
    _require_rank(eig_k, lambda_d, "Instance")
    _require_rank(eig_g, lambda_t, "Task")
    params = _filtered_solve(eig_k, eig_g, two_step(lambda_d, lambda_t), labels.values)
    return DualModel("TS", params, labels.instance_ids, labels.task_ids, lambda_d=lambda_d, lambda_t=lambda_t)


def _check_it_task_rows(g_test: np.ndarray) -> None:
    unit = np.isin(g_test, (0.0, 1.0)).all(axis=1) & (np.count_nonzero(g_test, axis=1) == 1)
    if not bool(np.all(unit)):
        bad = int(np.flatnonzero(~unit)[0])
        raise PairlearnError(
            "IT_NEW_TASK",
            "Independent-task models only predict for training tasks.",
            detail=f"task row {bad} is not a training task selector",
        )


def predict(model: DualModel, k_test: npt.ArrayLike, g_test: npt.ArrayLike | None = None) -> np.ndarray:
    """F = k_test A g_test^T; an IT model with g_test=None predicts all training tasks."""
    m, q = model.shape
    k = as_matrix(k_test, "instance test kernel")
    if k.shape[1] != m:
        raise PairlearnError("DIMENSION_MISMATCH", f"Instance test kernel needs {m} columns, got {k.shape[1]}.")
    if g_test is None:
        if model.variant != "IT":
            raise PairlearnError("DIMENSION_MISMATCH", f"{model.variant} predictions need a task test kernel.")
        return k @ model.params
    g = as_matrix(g_test, "task test kernel")
    if g.shape[1] != q:
        raise PairlearnError("DIMENSION_MISMATCH", f"Task test kernel needs {q} columns, got {g.shape[1]}.")
    if model.variant == "IT":
        _check_it_task_rows(g)
    return k @ model.params @ g.T


def task_selector(model: DualModel, task_ids: list[str] | tuple[str, ...]) -> np.ndarray:
    """Identity rows picking training tasks by id, for IT prediction."""
    index = {task: idx for idx, task in enumerate(model.task_ids)}
    rows = np.zeros((len(task_ids), len(model.task_ids)))
    for row, task in enumerate(task_ids):
        if task not in index:
            raise PairlearnError("IT_NEW_TASK", "Independent-task models only predict for training tasks.", detail=task)
        rows[row, index[task]] = 1.0
    return rows


def impute_labels(
    instance_kernel: KernelMatrix,
    task_kernel: KernelMatrix,
    partial: LabelMatrix,
    lambda_d: float,
    lambda_t: float,
) -> LabelMatrix:
    """Fill missing cells from a two-step model trained on the fully observed rows."""
    if instance_kernel.ids != partial.instance_ids or task_kernel.ids != partial.task_ids:
        raise PairlearnError("ID_MISMATCH", "Kernel ids do not match the label matrix.")
    values = partial.values
    missing = np.isnan(values)
    if not missing.any():
        return partial
    complete_rows = np.flatnonzero(~missing.any(axis=1))
    if complete_rows.size == 0:
        raise PairlearnError("NO_TRAINING_DATA", "No instance has a fully observed label row.")
    incomplete_rows = np.flatnonzero(missing.any(axis=1))
    observed_ids = tuple(partial.instance_ids[idx] for idx in complete_rows)
    block_kernel = KernelMatrix(ids=observed_ids, gram=instance_kernel.gram[np.ix_(complete_rows, complete_rows)])
    block_labels = make_labels(observed_ids, partial.task_ids, values[complete_rows])
    model = fit_ts(block_kernel, task_kernel, block_labels, lambda_d, lambda_t)
    estimates = predict(model, instance_kernel.gram[np.ix_(incomplete_rows, complete_rows)], task_kernel.gram)
    filled = values.copy()
    rows_missing = missing[incomplete_rows]
    filled[incomplete_rows] = np.where(rows_missing, estimates, values[incomplete_rows])
    LOGGER.info(
        "labels imputed: observed_rows=%s imputed_rows=%s cells=%s",
        complete_rows.size,
        incomplete_rows.size,
        int(missing.sum()),
    )
    return LabelMatrix(instance_ids=partial.instance_ids, task_ids=partial.task_ids, values=filled)
