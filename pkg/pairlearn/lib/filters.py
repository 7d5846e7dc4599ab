"""Spectral filters, hat matrices and hat diagonals over kernel eigendecompositions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy import typing as npt

from pairlearn.lib.errors import PairlearnError
from pairlearn.lib.linalg import NEAR_ZERO, EigenDecomposition, symmetrize

FilterKind = Literal["tikhonov", "kronecker_tikhonov", "two_step"]


@dataclass(frozen=True)
class FilterSpec:
    """Regularizing filter over eigenvalues.

    tikhonov uses ``lam`` on the instance spectrum only (independent tasks),
    kronecker_tikhonov uses ``lam`` on products of eigenvalue pairs and
    two_step uses ``lambda_d`` and ``lambda_t`` on the two spectra separately.
    """

    kind: FilterKind
    lam: float = 0.0
    lambda_d: float = 0.0
    lambda_t: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("tikhonov", "kronecker_tikhonov", "two_step"):
            raise PairlearnError("INVALID_PARAMETER", f"Unknown filter kind: {self.kind}")
        for name in ("lam", "lambda_d", "lambda_t"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise PairlearnError("INVALID_PARAMETER", f"{name} must be a finite nonnegative number.", detail=str(value))


def tikhonov(lam: float) -> FilterSpec:
    return FilterSpec(kind="tikhonov", lam=lam)


def kronecker_tikhonov(lam: float) -> FilterSpec:
    return FilterSpec(kind="kronecker_tikhonov", lam=lam)


def two_step(lambda_d: float, lambda_t: float) -> FilterSpec:
    return FilterSpec(kind="two_step", lambda_d=lambda_d, lambda_t=lambda_t)


def _reciprocal(denominator: np.ndarray, what: str) -> np.ndarray:
    if np.any(np.abs(denominator) <= NEAR_ZERO):
        raise PairlearnError(
            "ZERO_DIVISOR",
            f"{what} filter hit a zero eigenvalue with zero regularization.",
            detail="use a positive lambda or a full-rank kernel",
        )
    return 1.0 / denominator


def apply_filter(
    spec: FilterSpec,
    sigma: npt.ArrayLike,
    s: npt.ArrayLike | None = None,
) -> np.ndarray:
    """Filter value for instance eigenvalue(s) sigma and task eigenvalue(s) s; broadcasts."""
    sig = np.asarray(sigma, dtype=np.float64)
    if spec.kind == "tikhonov":
        return _reciprocal(sig + spec.lam, "tikhonov")
    if s is None:
        raise PairlearnError("INVALID_PARAMETER", f"{spec.kind} filter needs a task eigenvalue.")
    task = np.asarray(s, dtype=np.float64)
    if spec.kind == "kronecker_tikhonov":
        return _reciprocal(sig * task + spec.lam, "kronecker")
    return _reciprocal(sig + spec.lambda_d, "two-step") * _reciprocal(task + spec.lambda_t, "two-step")


def filter_grid(spec: FilterSpec, eig_k: EigenDecomposition, eig_g: EigenDecomposition) -> np.ndarray:
    """m x q grid of filter values over all (sigma_a, s_b); tikhonov is constant along tasks."""
    sigma = eig_k.values[:, None]
    s = eig_g.values[None, :]
    if spec.kind == "tikhonov":
        return np.broadcast_to(apply_filter(spec, sigma), (eig_k.size, eig_g.size)).copy()
    return apply_filter(spec, sigma, s)


def hat_spectrum(spec: FilterSpec, eig_k: EigenDecomposition, eig_g: EigenDecomposition) -> np.ndarray:
    """Eigenvalues of the pairwise hat matrix laid out as an m x q grid."""
    sigma = eig_k.values[:, None]
    s = eig_g.values[None, :]
    if spec.kind == "tikhonov":
        shrink = sigma * apply_filter(spec, sigma)
        return np.broadcast_to(shrink, (eig_k.size, eig_g.size)).copy()
    if spec.kind == "two_step":
        return (sigma * apply_filter(tikhonov(spec.lambda_d), sigma)) * (s * apply_filter(tikhonov(spec.lambda_t), s))
    return sigma * s * apply_filter(spec, sigma, s)


def hat_matrix(decomposition: EigenDecomposition, lam: float) -> np.ndarray:
    """K (K + lam I)^-1 from the eigendecomposition of K."""
    if lam < 0:
        raise PairlearnError("INVALID_PARAMETER", "lambda must be nonnegative.")
    shrink = decomposition.values * apply_filter(tikhonov(lam), decomposition.values)
    vectors = decomposition.vectors
    return symmetrize((vectors * shrink) @ vectors.T)


def _check_label_shape(eig_k: EigenDecomposition, eig_g: EigenDecomposition, labels: np.ndarray) -> None:
    if labels.shape != (eig_k.size, eig_g.size):
        raise PairlearnError(
            "DIMENSION_MISMATCH",
            "Label matrix does not match the kernel sizes.",
            detail=f"labels {labels.shape} vs kernels ({eig_k.size}, {eig_g.size})",
        )


def pairwise_hat_action(
    eig_k: EigenDecomposition,
    eig_g: EigenDecomposition,
    spec: FilterSpec,
    labels: npt.ArrayLike,
) -> np.ndarray:
    """mat(H vec(Y)) computed as U (Psi * (U^T Y V)) V^T."""
    values = np.asarray(labels, dtype=np.float64)
    _check_label_shape(eig_k, eig_g, values)
    u, v = eig_k.vectors, eig_g.vectors
    return u @ (hat_spectrum(spec, eig_k, eig_g) * (u.T @ values @ v)) @ v.T


def pairwise_hat_diag(eig_k: EigenDecomposition, eig_g: EigenDecomposition, spec: FilterSpec) -> np.ndarray:
    """Diagonal of the pairwise hat matrix as an m x q grid: (U*U) Psi (V*V)^T."""
    u, v = eig_k.vectors, eig_g.vectors
    return (u * u) @ hat_spectrum(spec, eig_k, eig_g) @ (v * v).T
