"""Matrix CSV loading, writing and dataset bundle alignment."""

from __future__ import annotations

import hashlib
import logging
import os
from pathlib import Path
from typing import Sequence, cast

import numpy as np
import pandas as pd

from pairlearn.data.models import DatasetBundle, FileProvenance, MatrixKind
from pairlearn.data.validation import validate_matrix_frame
from pairlearn.lib.errors import PairlearnError
from pairlearn.lib.kernels import FeatureMatrix, KernelMatrix, LabelMatrix, make_kernel, make_labels
from pairlearn.lib.linalg import EigenDecomposition

LOGGER = logging.getLogger(__name__)
FLOAT_FORMAT = "%.17g"


def _absolute(path: str | Path) -> Path:
    candidate = Path(path)
    return candidate if candidate.is_absolute() else Path(os.path.abspath(candidate))


def file_sha256(path: str | Path) -> str:
    digest = hashlib.sha256()
    try:
        with open(path, "rb") as handle:
            for chunk in iter(lambda: handle.read(1 << 16), b""):
                digest.update(chunk)
    except OSError as error:
        raise PairlearnError("IO_FAILURE", f"Cannot read {path}.", detail=str(error)) from error
    return digest.hexdigest()


def _read_frame(path: Path) -> pd.DataFrame:
    try:
        return pd.read_csv(path, header=None, dtype=str, keep_default_na=False, encoding="utf-8", skip_blank_lines=True)
    except FileNotFoundError as error:
        raise PairlearnError("IO_FAILURE", f"File not found: {path}") from error
    except pd.errors.EmptyDataError as error:
        raise PairlearnError("PARSE_ERROR", f"File is empty: {path}") from error
    except pd.errors.ParserError as error:
        raise PairlearnError("PARSE_ERROR", f"Malformed CSV in {path}.", detail=str(error).strip()) from error
    except (OSError, UnicodeDecodeError) as error:
        raise PairlearnError("IO_FAILURE", f"Cannot read {path}.", detail=str(error)) from error


def read_matrix_csv(
    path: str | Path,
    kind: MatrixKind,
    clip_spectrum: bool = False,
    allow_missing: bool = False,
) -> LabelMatrix | KernelMatrix | FeatureMatrix:
    """Parse a header + id-column CSV into a label, kernel or feature matrix."""
    absolute = _absolute(path)
    frame = _read_frame(absolute)
    issues, parsed = validate_matrix_frame(frame, kind, allow_missing=allow_missing)
    if issues:
        first = issues[0]
        code = "ID_COLLISION" if first.code == "duplicate_id" else "PARSE_ERROR"
        where = f"line {first.row}, {first.field}" if first.row is not None else first.field
        raise PairlearnError(code, f"{absolute.name}: {first.message}", detail=f"{where} ({len(issues)} issue(s))")

    column_ids = tuple(str(cell).strip() for cell in frame.iloc[0].tolist()[1:])
    row_ids = tuple(str(cell).strip() for cell in frame.iloc[1:, 0].tolist())
    values = np.asarray(parsed, dtype=np.float64).reshape(len(row_ids), len(column_ids))

    if kind == "label":
        return make_labels(row_ids, column_ids, values, allow_missing=allow_missing)
    if kind == "feature":
        return FeatureMatrix(ids=row_ids, columns=column_ids, values=values)
    if len(row_ids) != len(column_ids):
        raise PairlearnError(
            "NON_SQUARE_KERNEL",
            f"{absolute.name}: kernel has {len(row_ids)} rows and {len(column_ids)} columns.",
        )
    if set(row_ids) != set(column_ids):
        missing = sorted(set(row_ids) ^ set(column_ids))[0]
        raise PairlearnError("PARSE_ERROR", f"{absolute.name}: kernel row and column ids differ.", detail=missing)
    if row_ids != column_ids:
        position = {item: idx for idx, item in enumerate(column_ids)}
        values = values[:, [position[item] for item in row_ids]]
    return make_kernel(row_ids, values, clip_spectrum_flag=clip_spectrum)


def write_matrix_csv(
    path: str | Path,
    row_ids: Sequence[str],
    column_ids: Sequence[str],
    values: np.ndarray,
) -> None:
    frame = pd.DataFrame(np.asarray(values, dtype=np.float64), index=list(row_ids), columns=list(column_ids))
    frame.index.name = "id"
    try:
        frame.to_csv(_absolute(path), float_format=FLOAT_FORMAT, na_rep="", encoding="utf-8", lineterminator="\n")
    except OSError as error:
        raise PairlearnError("IO_FAILURE", f"Cannot write {path}.", detail=str(error)) from error


def write_labels(path: str | Path, labels: LabelMatrix) -> None:
    write_matrix_csv(path, labels.instance_ids, labels.task_ids, labels.values)


def write_kernel(path: str | Path, kernel: KernelMatrix) -> None:
    write_matrix_csv(path, kernel.ids, kernel.ids, kernel.gram)


def write_features(path: str | Path, features: FeatureMatrix) -> None:
    write_matrix_csv(path, features.ids, features.columns, features.values)


def _reorder(kernel: KernelMatrix, wanted: tuple[str, ...], what: str) -> KernelMatrix:
    position = {item: idx for idx, item in enumerate(kernel.ids)}
    for item in wanted:
        if item not in position:
            raise PairlearnError("MISSING_ID", f"{what} id missing from its kernel: {item}", detail=item)
    if kernel.ids == wanted:
        return kernel
    extra = kernel.size - len(wanted)
    if extra:
        LOGGER.warning("kernel ids dropped: kernel=%s extraneous=%s", what, extra)
    index = np.asarray([position[item] for item in wanted], dtype=np.int64)
    spectrum = None
    if not extra and kernel.spectrum is not None:
        # a permuted Gram keeps its eigenvalues; eigenvector rows follow the ids
        spectrum = EigenDecomposition(vectors=kernel.spectrum.vectors[index], values=kernel.spectrum.values)
    return KernelMatrix(ids=wanted, gram=kernel.gram[np.ix_(index, index)], spectrum=spectrum)


def align_bundle(
    labels: LabelMatrix,
    instance_kernel: KernelMatrix,
    task_kernel: KernelMatrix,
    provenance: tuple[FileProvenance, ...] = (),
) -> DatasetBundle:
    """Permute kernels into the label matrix's id order, dropping extraneous entities."""
    return DatasetBundle(
        labels=labels,
        instance_kernel=_reorder(instance_kernel, labels.instance_ids, "Instance"),
        task_kernel=_reorder(task_kernel, labels.task_ids, "Task"),
        provenance=provenance,
    )


def align_features(features: FeatureMatrix, wanted: tuple[str, ...], what: str) -> np.ndarray:
    position = {item: idx for idx, item in enumerate(features.ids)}
    for item in wanted:
        if item not in position:
            raise PairlearnError("MISSING_ID", f"{what} id missing from its feature file: {item}", detail=item)
    return features.values[[position[item] for item in wanted]]


def load_bundle(
    labels_path: str | Path,
    instance_kernel_path: str | Path,
    task_kernel_path: str | Path,
    clip_spectrum: bool = False,
    allow_missing: bool = False,
) -> DatasetBundle:
    labels = cast(LabelMatrix, read_matrix_csv(labels_path, "label", allow_missing=allow_missing))
    instance_kernel = cast(KernelMatrix, read_matrix_csv(instance_kernel_path, "kernel", clip_spectrum=clip_spectrum))
    task_kernel = cast(KernelMatrix, read_matrix_csv(task_kernel_path, "kernel", clip_spectrum=clip_spectrum))
    provenance = tuple(
        FileProvenance(path=str(_absolute(path)), sha256=file_sha256(path))
        for path in (labels_path, instance_kernel_path, task_kernel_path)
    )
    bundle = align_bundle(labels, instance_kernel, task_kernel, provenance)
    LOGGER.info("bundle loaded: m=%s q=%s", bundle.shape[0], bundle.shape[1])
    return bundle
