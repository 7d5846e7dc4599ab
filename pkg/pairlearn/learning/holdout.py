"""Exact leave-one-out predictions for Settings A-D, with a retraining oracle."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np
from scipy import linalg as sla

from pairlearn.learning import models
from pairlearn.lib.errors import PairlearnError
from pairlearn.lib.filters import (
    FilterSpec,
    hat_matrix,
    kronecker_tikhonov,
    pairwise_hat_action,
    pairwise_hat_diag,
    two_step,
)
from pairlearn.lib.kernels import DEFAULT_KRON_CAP, KernelMatrix, LabelMatrix, kron_gram, xi_gram
from pairlearn.lib.linalg import EigenDecomposition, as_matrix

LOGGER = logging.getLogger(__name__)
Setting = Literal["A", "B", "C", "D"]
SETTINGS: tuple[Setting, ...] = ("A", "B", "C", "D")
LooVariant = Literal["IT", "KK", "TS"]
DENOMINATOR_FLOOR = 1e-12
DEFAULT_ORACLE_CAP = 400


@dataclass(frozen=True)
class LooResult:
    setting: Setting
    predictions: np.ndarray
    model_variant: LooVariant
    lambda_d: float = 0.0
    lambda_t: float = 0.0
    lam: float = 0.0


@dataclass(frozen=True)
class SuspectDyad:
    instance_id: str
    task_id: str
    label: float
    loo_value: float
    residual: float


def check_setting(setting: str) -> Setting:
    clean = setting.strip().upper()
    if clean not in SETTINGS:
        raise PairlearnError("USAGE", f"Unknown setting: {setting}", detail="expected one of A, B, C, D")
    return clean  # type: ignore[return-value]


def _denominator(
    diagonal: np.ndarray, ids: Sequence[str] | None, what: str, task_ids: Sequence[str] | None = None
) -> np.ndarray:
    denominator = 1.0 - diagonal
    low = denominator < DENOMINATOR_FLOOR
    if np.any(low):
        position = np.unravel_index(int(np.flatnonzero(low.reshape(-1))[0]), denominator.shape)
        if ids is not None and len(position) == 1:
            offender = ids[position[0]]
        elif ids is not None and task_ids is not None:
            offender = f"{ids[position[0]]}/{task_ids[position[1]]}"
        else:
            offender = "/".join(str(idx) for idx in position)
        raise PairlearnError(
            "DENOMINATOR_UNDERFLOW",
            f"Leave-one-out denominator for {what} fell below 1e-12; increase lambda or remove duplicated entities.",
            detail=offender,
        )
    return denominator


def _square(matrix: np.ndarray, name: str) -> np.ndarray:
    data = as_matrix(matrix, name)
    if data.shape[0] != data.shape[1]:
        raise PairlearnError("DIMENSION_MISMATCH", f"{name} must be square, got shape {data.shape}.")
    return data


def _leave_row_out(hat: np.ndarray, labels: np.ndarray, ids: Sequence[str] | None, what: str) -> np.ndarray:
    diagonal = np.diag(hat)
    denominator = _denominator(diagonal, ids, what)
    return (hat @ labels - diagonal[:, None] * labels) / denominator[:, None]


def loo_it(
    hat_k: np.ndarray,
    labels: np.ndarray,
    instance_ids: Sequence[str] | None = None,
    setting: Setting = "B",
    lambda_d: float = 0.0,
) -> LooResult:
    """Re-estimate every label row from a model trained without that instance."""
    hat = _square(hat_k, "instance hat matrix")
    values = as_matrix(labels, "labels")
    if values.shape[0] != hat.shape[0]:
        raise PairlearnError("DIMENSION_MISMATCH", "Instance hat matrix does not match label rows.")
    predictions = _leave_row_out(hat, values, instance_ids, "instance")
    return LooResult(setting, predictions, "IT", lambda_d=lambda_d)


def loo_setting_a(
    variant: LooVariant,
    eig_k: EigenDecomposition,
    eig_g: EigenDecomposition,
    labels: np.ndarray,
    lambda_d: float = 0.0,
    lambda_t: float = 0.0,
    lam: float = 0.0,
    instance_ids: Sequence[str] | None = None,
    task_ids: Sequence[str] | None = None,
) -> LooResult:
    """Leave one dyad out at a time through the pairwise hat action and hat diagonal."""
    spec: FilterSpec
    if variant == "KK":
        spec = kronecker_tikhonov(lam)
    elif variant == "TS":
        spec = two_step(lambda_d, lambda_t)
    else:
        raise PairlearnError("UNSUPPORTED_COMBINATION", f"Setting A shortcut covers KK and TS, not {variant}.")
    values = as_matrix(labels, "labels")
    fitted = pairwise_hat_action(eig_k, eig_g, spec, values)
    diagonal = pairwise_hat_diag(eig_k, eig_g, spec)
    denominator = _denominator(diagonal, instance_ids, "dyad", task_ids)
    predictions = (fitted - diagonal * values) / denominator
    return LooResult("A", predictions, variant, lambda_d=lambda_d, lambda_t=lambda_t, lam=lam)


def _pair(hat_k: np.ndarray, hat_g: np.ndarray, labels: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    hk = _square(hat_k, "instance hat matrix")
    hg = _square(hat_g, "task hat matrix")
    values = as_matrix(labels, "labels")
    if values.shape != (hk.shape[0], hg.shape[0]):
        raise PairlearnError(
            "DIMENSION_MISMATCH",
            "Hat matrices do not match the label matrix.",
            detail=f"labels {values.shape} vs hats ({hk.shape[0]}, {hg.shape[0]})",
        )
    return hk, hg, values


def loo_setting_b(
    hat_k: np.ndarray,
    hat_g: np.ndarray,
    labels: np.ndarray,
    instance_ids: Sequence[str] | None = None,
    lambda_d: float = 0.0,
    lambda_t: float = 0.0,
) -> LooResult:
    """Leave one instance (row) out at a time."""
    hk, hg, values = _pair(hat_k, hat_g, labels)
    predictions = _leave_row_out(hk, values, instance_ids, "instance") @ hg
    return LooResult("B", predictions, "TS", lambda_d=lambda_d, lambda_t=lambda_t)


def loo_setting_c(
    hat_k: np.ndarray,
    hat_g: np.ndarray,
    labels: np.ndarray,
    task_ids: Sequence[str] | None = None,
    lambda_d: float = 0.0,
    lambda_t: float = 0.0,
) -> LooResult:
    """Leave one task (column) out at a time."""
    hk, hg, values = _pair(hat_k, hat_g, labels)
    predictions = hk @ _leave_row_out(hg, values.T, task_ids, "task").T
    return LooResult("C", predictions, "TS", lambda_d=lambda_d, lambda_t=lambda_t)


def loo_setting_d(
    hat_k: np.ndarray,
    hat_g: np.ndarray,
    labels: np.ndarray,
    instance_ids: Sequence[str] | None = None,
    task_ids: Sequence[str] | None = None,
    lambda_d: float = 0.0,
    lambda_t: float = 0.0,
) -> LooResult:
    """Leave out the row and the column of each dyad at once."""
    hk, hg, values = _pair(hat_k, hat_g, labels)
    diag_k = np.diag(hk)
    diag_g = np.diag(hg)
    denominator = np.outer(_denominator(diag_k, instance_ids, "instance"), _denominator(diag_g, task_ids, "task"))
    predictions = (hk - np.diag(diag_k)) @ values @ (hg - np.diag(diag_g)) / denominator
    return LooResult("D", predictions, "TS", lambda_d=lambda_d, lambda_t=lambda_t)


def shortcut_loo(
    variant: str,
    setting: Setting,
    eig_k: EigenDecomposition,
    eig_g: EigenDecomposition,
    labels: LabelMatrix,
    lambda_d: float = 0.0,
    lambda_t: float = 0.0,
    lam: float = 0.0,
    hat_k: np.ndarray | None = None,
    hat_g: np.ndarray | None = None,
) -> LooResult:
    """Route a (variant, setting) pair to its closed-form leave-one-out computation."""
    setting = check_setting(setting)
    values = labels.values
    if variant == "IT":
        if setting in ("C", "D"):
            raise PairlearnError("UNSUPPORTED_COMBINATION", "Independent-task models cannot predict for new tasks.")
        hk = hat_matrix(eig_k, lambda_d) if hat_k is None else hat_k
        return loo_it(hk, values, labels.instance_ids, setting=setting, lambda_d=lambda_d)
    if variant == "KK":
        if setting != "A":
            raise PairlearnError(
                "UNSUPPORTED_COMBINATION",
                f"Kronecker KRR has no closed-form leave-one-out for setting {setting}; use the oracle.",
            )
        return loo_setting_a(
            "KK", eig_k, eig_g, values, lam=lam, instance_ids=labels.instance_ids, task_ids=labels.task_ids
        )
    if variant != "TS":
        raise PairlearnError("UNSUPPORTED_COMBINATION", f"No leave-one-out computation for {variant}.")
    if setting == "A":
        return loo_setting_a(
            "TS",
            eig_k,
            eig_g,
            values,
            lambda_d=lambda_d,
            lambda_t=lambda_t,
            instance_ids=labels.instance_ids,
            task_ids=labels.task_ids,
        )
    hk = hat_matrix(eig_k, lambda_d) if hat_k is None else hat_k
    hg = hat_matrix(eig_g, lambda_t) if hat_g is None else hat_g
    if setting == "B":
        return loo_setting_b(hk, hg, values, labels.instance_ids, lambda_d=lambda_d, lambda_t=lambda_t)
    if setting == "C":
        return loo_setting_c(hk, hg, values, labels.task_ids, lambda_d=lambda_d, lambda_t=lambda_t)
    return loo_setting_d(hk, hg, values, labels.instance_ids, labels.task_ids, lambda_d=lambda_d, lambda_t=lambda_t)


def _sub_kernel(kernel: KernelMatrix, keep: np.ndarray) -> KernelMatrix:
    return KernelMatrix(ids=tuple(kernel.ids[idx] for idx in keep), gram=kernel.gram[np.ix_(keep, keep)])


def _sub_labels(labels: LabelMatrix, rows: np.ndarray, cols: np.ndarray) -> LabelMatrix:
    return LabelMatrix(
        instance_ids=tuple(labels.instance_ids[idx] for idx in rows),
        task_ids=tuple(labels.task_ids[idx] for idx in cols),
        values=labels.values[np.ix_(rows, cols)],
    )


def _refit(
    variant: LooVariant,
    instance_kernel: KernelMatrix,
    task_kernel: KernelMatrix,
    labels: LabelMatrix,
    lambda_d: float,
    lambda_t: float,
    lam: float,
) -> models.DualModel:
    if variant == "IT":
        return models.fit_it(instance_kernel, labels, lambda_d)
    if variant == "KK":
        return models.fit_kk(instance_kernel, task_kernel, labels, lam)
    return models.fit_ts(instance_kernel, task_kernel, labels, lambda_d, lambda_t)


def _solve_spd(system: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        return sla.solve(system, rhs, assume_a="pos")
    except (sla.LinAlgError, ValueError) as error:
        raise PairlearnError("SINGULAR_SYSTEM", "Reduced pairwise system is singular.") from error


def _leave_dyad_out(gram: np.ndarray, targets: np.ndarray, ridge: float) -> np.ndarray:
    """Plain KRR leave-one-out by refitting on every subset of size n - 1."""
    size = targets.shape[0]
    estimates = np.empty(size)
    for held in range(size):
        keep = np.delete(np.arange(size), held)
        system = gram[np.ix_(keep, keep)] + ridge * np.eye(size - 1)
        estimates[held] = gram[held, keep] @ _solve_spd(system, targets[keep])
    return estimates


def _reported(
    variant: LooVariant, setting: Setting, predictions: np.ndarray, lambda_d: float, lambda_t: float, lam: float
) -> LooResult:
    """Report only the regularization parameters the variant uses."""
    if variant == "IT":
        return LooResult(setting, predictions, variant, lambda_d=lambda_d)
    if variant == "KK":
        return LooResult(setting, predictions, variant, lam=lam)
    return LooResult(setting, predictions, variant, lambda_d=lambda_d, lambda_t=lambda_t)


def brute_force_loo(
    variant: LooVariant,
    setting: Setting,
    instance_kernel: KernelMatrix,
    task_kernel: KernelMatrix,
    labels: LabelMatrix,
    lambda_d: float = 0.0,
    lambda_t: float = 0.0,
    lam: float = 0.0,
    max_dyads: int = DEFAULT_ORACLE_CAP,
    max_pairs: int = DEFAULT_KRON_CAP,
) -> LooResult:
    """Refit from scratch for every held-out unit; the reference for every shortcut."""
    setting = check_setting(setting)
    models.check_alignment(labels, instance_kernel, task_kernel)
    m, q = labels.shape
    if m * q > max_dyads:
        raise PairlearnError(
            "SIZE_OVERFLOW",
            "Brute-force leave-one-out is limited to small problems.",
            detail=f"{m * q} dyads > cap {max_dyads}",
        )
    if variant not in ("IT", "KK", "TS"):
        raise PairlearnError("UNSUPPORTED_COMBINATION", f"No leave-one-out oracle for {variant}.")
    if variant == "IT" and setting in ("C", "D"):
        raise PairlearnError("UNSUPPORTED_COMBINATION", "Independent-task models cannot predict for new tasks.")
    empty = {"A": m * q <= 1, "B": m <= 1, "C": q <= 1, "D": m <= 1 or q <= 1}[setting]
    if empty:
        raise PairlearnError("NO_TRAINING_DATA", f"Setting {setting} leaves no training data on a {m}x{q} problem.")
    if setting == "A" and variant == "TS" and not (lambda_d > 0 and lambda_t > 0):
        raise PairlearnError(
            "INVALID_PARAMETER",
            "The two-step dyad oracle refits an equivalent pairwise ridge that needs lambda_d > 0 and lambda_t > 0.",
            detail=f"lambda_d={lambda_d} lambda_t={lambda_t}",
        )

    values = labels.values
    predictions = np.empty((m, q))
    all_rows = np.arange(m)
    all_cols = np.arange(q)

    if setting == "A" and variant == "TS":
        gram = xi_gram(instance_kernel, task_kernel, lambda_d, lambda_t, max_pairs)
        flat = _leave_dyad_out(gram, values.reshape(-1, order="F"), 1.0)
        predictions = flat.reshape((m, q), order="F")
    elif setting == "A" and variant == "KK":
        gram = kron_gram(task_kernel, instance_kernel, max_pairs)
        flat = _leave_dyad_out(gram, values.reshape(-1, order="F"), lam)
        predictions = flat.reshape((m, q), order="F")
    elif setting in ("A", "B"):
        # IT is the same computation for A and B; TS and KK refit per held-out row.
        for row in range(m):
            rows = np.delete(all_rows, row)
            model = _refit(
                variant,
                _sub_kernel(instance_kernel, rows),
                task_kernel,
                _sub_labels(labels, rows, all_cols),
                lambda_d,
                lambda_t,
                lam,
            )
            k_row = instance_kernel.gram[row, rows][None, :]
            g_test = None if variant == "IT" else task_kernel.gram
            predictions[row] = models.predict(model, k_row, g_test)[0]
    elif setting == "C":
        for col in range(q):
            cols = np.delete(all_cols, col)
            model = _refit(
                variant,
                instance_kernel,
                _sub_kernel(task_kernel, cols),
                _sub_labels(labels, all_rows, cols),
                lambda_d,
                lambda_t,
                lam,
            )
            predictions[:, col] = models.predict(model, instance_kernel.gram, task_kernel.gram[col, cols][None, :])[:, 0]
    else:
        for row in range(m):
            rows = np.delete(all_rows, row)
            sub_k = _sub_kernel(instance_kernel, rows)
            for col in range(q):
                cols = np.delete(all_cols, col)
                model = _refit(
                    variant,
                    sub_k,
                    _sub_kernel(task_kernel, cols),
                    _sub_labels(labels, rows, cols),
                    lambda_d,
                    lambda_t,
                    lam,
                )
                k_row = instance_kernel.gram[row, rows][None, :]
                g_row = task_kernel.gram[col, cols][None, :]
                predictions[row, col] = models.predict(model, k_row, g_row)[0, 0]
    LOGGER.info("brute-force loo finished: variant=%s setting=%s dyads=%s", variant, setting, m * q)
    return _reported(variant, setting, predictions, lambda_d, lambda_t, lam)


def suspect_dyads(labels: LabelMatrix, result: LooResult, top: int) -> list[SuspectDyad]:
    """Dyads ranked by absolute leave-one-out residual, largest first."""
    if top < 0:
        raise PairlearnError("INVALID_PARAMETER", "top must be nonnegative.")
    if result.predictions.shape != labels.values.shape:
        raise PairlearnError("DIMENSION_MISMATCH", "Leave-one-out predictions do not match the label matrix.")
    residuals = labels.values - result.predictions
    order = np.argsort(-np.abs(residuals), axis=None, kind="stable")[:top]
    suspects: list[SuspectDyad] = []
    for flat in order:
        row, col = np.unravel_index(int(flat), residuals.shape)
        suspects.append(
            SuspectDyad(
                instance_id=labels.instance_ids[row],
                task_id=labels.task_ids[col],
                label=float(labels.values[row, col]),
                loo_value=float(result.predictions[row, col]),
                residual=float(residuals[row, col]),
            )
        )
    return suspects
