"""Primal two-step model with closed-form mini-batch updates for new instances or tasks."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np
from numpy import typing as npt
from scipy import linalg as sla

from pairlearn.lib.errors import PairlearnError
from pairlearn.lib.linalg import as_matrix, symmetrize

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class PrimalModel:
    """W = M (Phi^T Y) Psi N for all data seen so far.

    M = (Phi^T Phi + lambda_d I)^-1 and N = (Psi^T Psi + lambda_t I)^-1. Both label
    moments are kept so instance and task batches can be interleaved; the m x r
    moment grows with the number of instances.
    """

    weights: np.ndarray
    instance_inverse: np.ndarray
    task_inverse: np.ndarray
    instance_moment: np.ndarray
    task_moment: np.ndarray
    instance_features: np.ndarray
    task_features: np.ndarray
    lambda_d: float
    lambda_t: float

    @property
    def n_instances(self) -> int:
        return int(self.instance_features.shape[0])

    @property
    def n_tasks(self) -> int:
        return int(self.task_features.shape[0])

    @property
    def instance_dim(self) -> int:
        return int(self.instance_features.shape[1])

    @property
    def task_dim(self) -> int:
        return int(self.task_features.shape[1])


def _spd_inverse(matrix: np.ndarray, what: str) -> np.ndarray:
    try:
        factor = sla.cho_factor(symmetrize(matrix), check_finite=False)
    except sla.LinAlgError as error:
        raise PairlearnError("SINGULAR_SYSTEM", f"{what} is not positive definite.") from error
    return symmetrize(sla.cho_solve(factor, np.eye(matrix.shape[0]), check_finite=False))


def _woodbury(inverse: np.ndarray, batch: np.ndarray) -> np.ndarray:
    """(inverse^-1 + batch^T batch)^-1, choosing the cheaper identity for the batch size."""
    rows, dim = batch.shape
    if rows == 1:
        projected = batch[0] @ inverse
        return symmetrize(inverse - np.outer(projected, projected) / (1.0 + float(projected @ batch[0])))
    if rows <= dim:
        projected = batch @ inverse
        core = _spd_inverse(projected @ batch.T + np.eye(rows), "Woodbury core")
        return symmetrize(inverse - projected.T @ core @ projected)
    precision = _spd_inverse(inverse, "Inverse Gram") + batch.T @ batch
    return _spd_inverse(precision, "Updated Gram")


def _weights(instance_inverse: np.ndarray, instance_moment: np.ndarray, task_features: np.ndarray, task_inverse: np.ndarray) -> np.ndarray:
    return instance_inverse @ instance_moment @ task_features @ task_inverse


def init_primal(
    instance_features: npt.ArrayLike,
    task_features: npt.ArrayLike,
    labels: npt.ArrayLike,
    lambda_d: float,
    lambda_t: float,
) -> PrimalModel:
    """W = (Phi^T Phi + lambda_d I)^-1 Phi^T Y Psi (Psi^T Psi + lambda_t I)^-1."""
    if not (lambda_d > 0 and lambda_t > 0):
        raise PairlearnError("INVALID_PARAMETER", "Primal models need strictly positive lambda_d and lambda_t.")
    phi = as_matrix(instance_features, "instance features")
    psi = as_matrix(task_features, "task features")
    values = as_matrix(labels, "labels")
    if values.shape != (phi.shape[0], psi.shape[0]):
        raise PairlearnError(
            "DIMENSION_MISMATCH",
            "Labels must have one row per instance and one column per task.",
            detail=f"labels {values.shape} vs features ({phi.shape[0]}, {psi.shape[0]})",
        )
    instance_inverse = _spd_inverse(phi.T @ phi + lambda_d * np.eye(phi.shape[1]), "Instance Gram")
    task_inverse = _spd_inverse(psi.T @ psi + lambda_t * np.eye(psi.shape[1]), "Task Gram")
    instance_moment = phi.T @ values
    return PrimalModel(
        weights=_weights(instance_inverse, instance_moment, psi, task_inverse),
        instance_inverse=instance_inverse,
        task_inverse=task_inverse,
        instance_moment=instance_moment,
        task_moment=values @ psi,
        instance_features=phi,
        task_features=psi,
        lambda_d=lambda_d,
        lambda_t=lambda_t,
    )


def update_instances(model: PrimalModel, instance_features: npt.ArrayLike, labels: npt.ArrayLike) -> PrimalModel:
    """Add a batch of l new instances with labels for every current task."""
    phi_new = as_matrix(instance_features, "new instance features")
    y_new = as_matrix(labels, "new instance labels")
    if phi_new.shape[1] != model.instance_dim:
        raise PairlearnError("DIMENSION_MISMATCH", f"New instances need {model.instance_dim} features, got {phi_new.shape[1]}.")
    if y_new.shape != (phi_new.shape[0], model.n_tasks):
        raise PairlearnError(
            "DIMENSION_MISMATCH",
            "New instance labels must cover every current task.",
            detail=f"labels {y_new.shape} vs expected ({phi_new.shape[0]}, {model.n_tasks})",
        )
    instance_inverse = _woodbury(model.instance_inverse, phi_new)
    instance_moment = model.instance_moment + phi_new.T @ y_new
    LOGGER.debug("instance batch applied: batch=%s instances=%s", phi_new.shape[0], model.n_instances + phi_new.shape[0])
    return replace(
        model,
        weights=_weights(instance_inverse, instance_moment, model.task_features, model.task_inverse),
        instance_inverse=instance_inverse,
        instance_moment=instance_moment,
        task_moment=np.vstack([model.task_moment, y_new @ model.task_features]),
        instance_features=np.vstack([model.instance_features, phi_new]),
    )


def update_tasks(model: PrimalModel, task_features: npt.ArrayLike, labels: npt.ArrayLike) -> PrimalModel:
    """Add a batch of l new tasks with labels for every current instance."""
    psi_new = as_matrix(task_features, "new task features")
    y_new = as_matrix(labels, "new task labels")
    if psi_new.shape[1] != model.task_dim:
        raise PairlearnError("DIMENSION_MISMATCH", f"New tasks need {model.task_dim} features, got {psi_new.shape[1]}.")
    if y_new.shape != (model.n_instances, psi_new.shape[0]):
        raise PairlearnError(
            "DIMENSION_MISMATCH",
            "New task labels must cover every current instance.",
            detail=f"labels {y_new.shape} vs expected ({model.n_instances}, {psi_new.shape[0]})",
        )
    task_inverse = _woodbury(model.task_inverse, psi_new)
    task_moment = model.task_moment + y_new @ psi_new
    weights = model.instance_inverse @ model.instance_features.T @ task_moment @ task_inverse
    LOGGER.debug("task batch applied: batch=%s tasks=%s", psi_new.shape[0], model.n_tasks + psi_new.shape[0])
    return replace(
        model,
        weights=weights,
        task_inverse=task_inverse,
        task_moment=task_moment,
        instance_moment=np.hstack([model.instance_moment, model.instance_features.T @ y_new]),
        task_features=np.vstack([model.task_features, psi_new]),
    )


def predict_primal(model: PrimalModel, instance_vector: npt.ArrayLike, task_vector: npt.ArrayLike) -> float:
    phi = np.asarray(instance_vector, dtype=np.float64).reshape(-1)
    psi = np.asarray(task_vector, dtype=np.float64).reshape(-1)
    if phi.shape[0] != model.instance_dim or psi.shape[0] != model.task_dim:
        raise PairlearnError(
            "DIMENSION_MISMATCH",
            "Feature vectors do not match the model dimensions.",
            detail=f"({phi.shape[0]}, {psi.shape[0]}) vs ({model.instance_dim}, {model.task_dim})",
        )
    return float(phi @ model.weights @ psi)


def predict_primal_matrix(model: PrimalModel, instance_features: npt.ArrayLike, task_features: npt.ArrayLike) -> np.ndarray:
    phi = as_matrix(instance_features, "instance features")
    psi = as_matrix(task_features, "task features")
    if phi.shape[1] != model.instance_dim or psi.shape[1] != model.task_dim:
        raise PairlearnError("DIMENSION_MISMATCH", "Feature matrices do not match the model dimensions.")
    return phi @ model.weights @ psi.T


def dual_to_primal(params: npt.ArrayLike, instance_features: npt.ArrayLike, task_features: npt.ArrayLike) -> np.ndarray:
    """W = Phi^T A Psi for linear kernels K = Phi Phi^T and G = Psi Psi^T."""
    return as_matrix(instance_features, "instance features").T @ as_matrix(params, "dual parameters") @ as_matrix(
        task_features, "task features"
    )
