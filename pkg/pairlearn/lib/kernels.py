"""Instance/task Gram matrices, label matrices and explicit pairwise kernels."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy import typing as npt

from pairlearn.lib.errors import PairlearnError
from pairlearn.lib.linalg import (
    ASYMMETRY_TOLERANCE,
    EigenDecomposition,
    asymmetry,
    clip_spectrum,
    reconstruct,
    sym_eig,
    symmetrize,
)

LOGGER = logging.getLogger(__name__)
PSD_TOLERANCE = 1e-9
DEFAULT_KRON_CAP = 4096


@dataclass(frozen=True)
class KernelMatrix:
    ids: tuple[str, ...]
    gram: np.ndarray
    spectrum: EigenDecomposition | None = field(default=None, compare=False, repr=False)

    @property
    def size(self) -> int:
        return len(self.ids)


@dataclass(frozen=True)
class LabelMatrix:
    instance_ids: tuple[str, ...]
    task_ids: tuple[str, ...]
    values: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.instance_ids), len(self.task_ids)

    @property
    def is_complete(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))


@dataclass(frozen=True)
class FeatureMatrix:
    ids: tuple[str, ...]
    columns: tuple[str, ...]
    values: np.ndarray


def default_ids(prefix: str, count: int) -> tuple[str, ...]:
    return tuple(f"{prefix}{idx}" for idx in range(count))


def _check_ids(ids: Sequence[str], expected: int, what: str) -> tuple[str, ...]:
    clean = tuple(str(item) for item in ids)
    if len(clean) != expected:
        raise PairlearnError(
            "DIMENSION_MISMATCH",
            f"{what} has {len(clean)} ids but {expected} rows.",
        )
    seen: set[str] = set()
    for item in clean:
        if item in seen:
            raise PairlearnError("ID_COLLISION", f"Duplicate {what} id.", detail=item)
        seen.add(item)
    return clean


def make_kernel(
    ids: Sequence[str] | None,
    gram: npt.ArrayLike,
    clip_spectrum_flag: bool = False,
) -> KernelMatrix:
    """Validate a Gram matrix: square, symmetric within 1e-8 and PSD within 1e-9 of its scale."""
    matrix = np.asarray(gram, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise PairlearnError("NON_SQUARE_KERNEL", f"Kernel matrix must be square, got shape {matrix.shape}.")
    if not np.all(np.isfinite(matrix)):
        raise PairlearnError("INVALID_PARAMETER", "Kernel matrix contains NaN or infinite entries.")
    size = matrix.shape[0]
    clean_ids = _check_ids(ids if ids is not None else default_ids("e", size), size, "kernel")
    skew = asymmetry(matrix)
    if skew > ASYMMETRY_TOLERANCE:
        raise PairlearnError(
            "ASYMMETRIC_INPUT",
            "Kernel matrix is not symmetric within tolerance.",
            detail=f"relative asymmetry {skew:.3e}",
        )
    matrix = symmetrize(matrix)
    spectrum = None
    if size:
        spectrum = sym_eig(matrix)
        values = spectrum.values
        scale = float(np.max(np.abs(values)))
        if float(values.min()) < -PSD_TOLERANCE * scale:
            if not clip_spectrum_flag:
                raise PairlearnError(
                    "NOT_PSD",
                    "Kernel matrix has negative eigenvalues beyond tolerance; use --clip-spectrum to clamp them.",
                    detail=f"min eigenvalue {float(values.min()):.3e}",
                )
            spectrum = clip_spectrum(spectrum)
            matrix = symmetrize(reconstruct(spectrum))
            LOGGER.info("kernel spectrum clipped: size=%s min_eigenvalue=%.3e", size, float(values.min()))
    return KernelMatrix(ids=clean_ids, gram=matrix, spectrum=None if spectrum is None else clip_spectrum(spectrum))


def make_labels(
    instance_ids: Sequence[str] | None,
    task_ids: Sequence[str] | None,
    values: npt.ArrayLike,
    allow_missing: bool = False,
) -> LabelMatrix:
    matrix = np.asarray(values, dtype=np.float64)
    if matrix.ndim != 2:
        raise PairlearnError("DIMENSION_MISMATCH", f"Label matrix must be two-dimensional, got shape {matrix.shape}.")
    rows, cols = matrix.shape
    if np.any(np.isinf(matrix)) or (not allow_missing and np.any(np.isnan(matrix))):
        raise PairlearnError("INVALID_LABELS", "Label matrix must contain finite values only.")
    return LabelMatrix(
        instance_ids=_check_ids(instance_ids if instance_ids is not None else default_ids("d", rows), rows, "instance"),
        task_ids=_check_ids(task_ids if task_ids is not None else default_ids("t", cols), cols, "task"),
        values=matrix,
    )


def kernel_decomposition(kernel: KernelMatrix) -> EigenDecomposition:
    """Eigendecomposition of a kernel with negative noise eigenvalues clipped to zero."""
    if kernel.spectrum is not None:
        return kernel.spectrum
    return clip_spectrum(sym_eig(kernel.gram))


def shift_kernel(kernel: KernelMatrix, shift: float) -> KernelMatrix:
    if shift < 0:
        raise PairlearnError("INVALID_PARAMETER", "Diagonal shift must be nonnegative.")
    spectrum = kernel.spectrum
    if spectrum is not None:
        spectrum = EigenDecomposition(vectors=spectrum.vectors, values=spectrum.values + shift)
    return KernelMatrix(ids=kernel.ids, gram=kernel.gram + shift * np.eye(kernel.size), spectrum=spectrum)


def gram_linear(features: Sequence[Sequence[float]] | np.ndarray, ids: Sequence[str] | None = None) -> KernelMatrix:
    rows = [np.asarray(row, dtype=np.float64).reshape(-1) for row in features]
    widths = {row.shape[0] for row in rows}
    if len(widths) > 1:
        raise PairlearnError("RAGGED_INPUT", "Feature vectors must all have the same length.", detail=str(sorted(widths)))
    matrix = np.vstack(rows) if rows else np.zeros((0, 0))
    return make_kernel(ids, matrix @ matrix.T)


def gram_rbf(
    distances: npt.ArrayLike,
    scale: float,
    ids: Sequence[str] | None = None,
    clip_spectrum_flag: bool = False,
) -> KernelMatrix:
    """exp(-d_ij / scale) over a symmetric, nonnegative, zero-diagonal distance matrix."""
    if not scale > 0:
        raise PairlearnError("INVALID_PARAMETER", "RBF scale must be positive.")
    matrix = np.asarray(distances, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise PairlearnError("NON_SQUARE_KERNEL", f"Distance matrix must be square, got shape {matrix.shape}.")
    if np.any(matrix < 0):
        raise PairlearnError("NEGATIVE_DISTANCE", "Distances must be nonnegative.")
    if asymmetry(matrix) > ASYMMETRY_TOLERANCE:
        raise PairlearnError("ASYMMETRIC_INPUT", "Distance matrix is not symmetric within tolerance.")
    if np.any(np.diag(matrix) != 0):
        raise PairlearnError("INVALID_DISTANCE", "Distance matrix must have a zero diagonal.")
    return make_kernel(ids, np.exp(-symmetrize(matrix) / scale), clip_spectrum_flag=clip_spectrum_flag)


def _check_pair_cap(instance_kernel: KernelMatrix, task_kernel: KernelMatrix, max_pairs: int) -> None:
    pairs = instance_kernel.size * task_kernel.size
    if pairs > max_pairs:
        raise PairlearnError(
            "SIZE_OVERFLOW",
            "Explicit pairwise Gram matrices are limited to small problems.",
            detail=f"{pairs} pairs > cap {max_pairs}",
        )


def kron_gram(task_kernel: KernelMatrix, instance_kernel: KernelMatrix, max_pairs: int = DEFAULT_KRON_CAP) -> np.ndarray:
    """G kron K; entry (j*m + i, j'*m + i') equals G[j, j'] * K[i, i']."""
    _check_pair_cap(instance_kernel, task_kernel, max_pairs)
    return np.kron(task_kernel.gram, instance_kernel.gram)


def xi_gram(
    instance_kernel: KernelMatrix,
    task_kernel: KernelMatrix,
    lambda_d: float,
    lambda_t: float,
    max_pairs: int = DEFAULT_KRON_CAP,
) -> np.ndarray:
    """(G kron K)(lambda_d lambda_t I + lambda_t I kron K + lambda_d G kron I)^-1 via the joint eigenbasis.

    Kernel ridge regression with this pairwise kernel and unit regularization
    reproduces the two-step training-set predictions.
    """
    if not (lambda_d > 0 and lambda_t > 0):
        raise PairlearnError("INVALID_PARAMETER", "xi_gram needs strictly positive lambda_d and lambda_t.")
    _check_pair_cap(instance_kernel, task_kernel, max_pairs)
    eig_k = kernel_decomposition(instance_kernel)
    eig_g = kernel_decomposition(task_kernel)
    sigma = eig_k.values[:, None]
    s = eig_g.values[None, :]
    coefficients = (sigma * s) / (lambda_d * lambda_t + lambda_t * sigma + lambda_d * s)
    basis = np.kron(eig_g.vectors, eig_k.vectors)
    return symmetrize((basis * coefficients.reshape(-1, order="F")) @ basis.T)


def upsilon_gram(
    instance_kernel: KernelMatrix,
    task_kernel: KernelMatrix,
    lambda_d: float,
    lambda_t: float,
    max_pairs: int = DEFAULT_KRON_CAP,
) -> np.ndarray:
    """(G + lambda_t I) kron (K + lambda_d I) on the training pairs."""
    return kron_gram(shift_kernel(task_kernel, lambda_t), shift_kernel(instance_kernel, lambda_d), max_pairs)


def rescore_labels(labels: LabelMatrix) -> LabelMatrix:
    """Map positives to N/N+ and negatives to -N/N-, with N = m*q, so the labels sum to zero."""
    values = labels.values
    if not np.all(np.isin(values, (0.0, 1.0))):
        raise PairlearnError("INVALID_LABELS", "Label rescoring needs a binary {0, 1} label matrix.")
    total = values.size
    positives = int(np.count_nonzero(values == 1.0))
    negatives = total - positives
    if positives == 0 or negatives == 0:
        raise PairlearnError("ALL_SAME_CLASS", "Label rescoring needs both positive and negative dyads.")
    rescored = np.where(values == 1.0, total / positives, -total / negatives)
    return LabelMatrix(instance_ids=labels.instance_ids, task_ids=labels.task_ids, values=rescored)
