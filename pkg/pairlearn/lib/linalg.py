"""Dense symmetric eigendecomposition and Kronecker-structured helpers."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy import typing as npt
from scipy import linalg as sla

from pairlearn.lib.errors import PairlearnError

ASYMMETRY_TOLERANCE = 1e-8
SPECTRUM_CLAMP = 1e-12
NEAR_ZERO = 1e-300
ElementwiseOp = Literal["multiply", "divide", "reciprocal_shift"]


@dataclass(frozen=True)
class EigenDecomposition:
    """Orthonormal eigenvectors (columns) and ascending eigenvalues."""

    vectors: np.ndarray
    values: np.ndarray

    @property
    def size(self) -> int:
        return int(self.values.shape[0])

    @property
    def max_value(self) -> float:
        return float(self.values.max()) if self.values.size else 0.0

    @property
    def is_full_rank(self) -> bool:
        return bool(self.values.size) and float(self.values.min()) > 0.0


def as_matrix(values: npt.ArrayLike, name: str = "matrix") -> np.ndarray:
    matrix = np.asarray(values, dtype=np.float64)
    if matrix.ndim != 2:
        raise PairlearnError("DIMENSION_MISMATCH", f"{name} must be two-dimensional, got shape {matrix.shape}.")
    if not np.all(np.isfinite(matrix)):
        raise PairlearnError("INVALID_PARAMETER", f"{name} contains NaN or infinite entries.")
    return matrix


def asymmetry(matrix: np.ndarray) -> float:
    """Largest absolute entry of M - M^T relative to the largest entry of M."""
    scale = float(np.max(np.abs(matrix))) if matrix.size else 0.0
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(matrix - matrix.T))) / scale


def symmetrize(matrix: np.ndarray) -> np.ndarray:
    return (matrix + matrix.T) / 2.0


def sym_eig(matrix: npt.ArrayLike) -> EigenDecomposition:
    """Factor a symmetric matrix as U diag(values) U^T with ascending values.

    Eigenvalues within 1e-12 of the spectral scale are clamped to exactly zero so
    that rank deficiency is detected downstream rather than amplified.
    """
    data = as_matrix(matrix)
    if data.shape[0] != data.shape[1]:
        raise PairlearnError("NON_SQUARE", f"Expected a square matrix, got shape {data.shape}.")
    skew = asymmetry(data)
    if skew > ASYMMETRY_TOLERANCE:
        raise PairlearnError(
            "EXCESSIVE_ASYMMETRY",
            "Matrix is not symmetric within tolerance.",
            detail=f"relative asymmetry {skew:.3e}",
        )
    try:
        values, vectors = sla.eigh(symmetrize(data), check_finite=False)
    except (sla.LinAlgError, ValueError) as error:
        raise PairlearnError("CONVERGENCE_FAILURE", "Symmetric eigensolver did not converge.") from error
    scale = float(np.max(np.abs(values))) if values.size else 0.0
    values = np.where(np.abs(values) <= SPECTRUM_CLAMP * scale, 0.0, values)
    return EigenDecomposition(vectors=vectors, values=values)


def clip_spectrum(decomposition: EigenDecomposition) -> EigenDecomposition:
    """Replace negative eigenvalues by zero."""
    if decomposition.values.size == 0 or float(decomposition.values.min()) >= 0.0:
        return decomposition
    return EigenDecomposition(vectors=decomposition.vectors, values=np.maximum(decomposition.values, 0.0))


def reconstruct(decomposition: EigenDecomposition) -> np.ndarray:
    vectors = decomposition.vectors
    return (vectors * decomposition.values) @ vectors.T


def kron_apply(left: npt.ArrayLike, x: npt.ArrayLike, right: npt.ArrayLike) -> np.ndarray:
    """Return left @ x @ right, i.e. mat((right^T kron left) vec(x)), without forming the Kronecker product."""
    lhs = as_matrix(left, "left factor")
    mid = as_matrix(x, "x")
    rhs = as_matrix(right, "right factor")
    if lhs.shape[1] != mid.shape[0] or mid.shape[1] != rhs.shape[0]:
        raise PairlearnError(
            "DIMENSION_MISMATCH",
            "Factors are not conformable.",
            detail=f"{lhs.shape} x {mid.shape} x {rhs.shape}",
        )
    return lhs @ mid @ rhs


def vec(matrix: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization; entry (i, j) of an m x q matrix lands at m*j + i."""
    return np.asarray(matrix).reshape(-1, order="F")


def unvec(vector: np.ndarray, rows: int, cols: int) -> np.ndarray:
    return np.asarray(vector).reshape((rows, cols), order="F")


def elementwise(op: ElementwiseOp, a: npt.ArrayLike, b: npt.ArrayLike | float) -> np.ndarray:
    left = np.asarray(a, dtype=np.float64)
    right = np.asarray(b, dtype=np.float64)
    if right.ndim != 0 and right.shape != left.shape:
        raise PairlearnError(
            "DIMENSION_MISMATCH",
            f"Elementwise {op} needs equal shapes or a scalar.",
            detail=f"{left.shape} vs {right.shape}",
        )
    if op == "multiply":
        result = left * right
    elif op == "divide":
        if np.any(np.abs(right) <= NEAR_ZERO):
            raise PairlearnError("DIVISION_BY_NEAR_ZERO", "Divisor has entries within 1e-300 of zero.")
        result = left / right
    elif op == "reciprocal_shift":
        shifted = left + right
        if np.any(np.abs(shifted) <= NEAR_ZERO):
            raise PairlearnError("DIVISION_BY_NEAR_ZERO", "Shifted values have entries within 1e-300 of zero.")
        result = 1.0 / shifted
    else:
        raise PairlearnError("INVALID_PARAMETER", f"Unknown elementwise operation: {op}")
    if not np.all(np.isfinite(result)):
        raise PairlearnError("DIVISION_BY_NEAR_ZERO", f"Elementwise {op} produced non-finite values.")
    return result
