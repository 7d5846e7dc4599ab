"""Typed records for dataset files, reports and learning curves."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

from pairlearn.lib.kernels import KernelMatrix, LabelMatrix

MatrixKind = Literal["label", "kernel", "feature"]
ReportFormat = Literal["json", "csv"]


@dataclass(frozen=True)
class FileProvenance:
    path: str
    sha256: str


@dataclass(frozen=True)
class DatasetBundle:
    labels: LabelMatrix
    instance_kernel: KernelMatrix
    task_kernel: KernelMatrix
    provenance: tuple[FileProvenance, ...] = ()

    @property
    def shape(self) -> tuple[int, int]:
        return self.labels.shape


@dataclass
class ValidationIssue:
    field: str
    message: str
    row: int | None = None
    code: str = "invalid_value"


@dataclass(frozen=True)
class GridRecord:
    lambda_d: float
    lambda_t: float
    lam: float | None
    score: float


@dataclass
class EvaluationReport:
    model: str
    setting: str
    metric: str
    grid: list[GridRecord]
    best: GridRecord | None
    timing_seconds: float
    m: int
    q: int
    provenance: list[str]


@dataclass(frozen=True)
class LearningCurveRow:
    batch: int
    n_instances: int
    n_tasks: int
    metric: str
    score: float
