from dataclasses import dataclass
from typing import Callable

import numpy as np
import pytest

from pairlearn.lib.kernels import KernelMatrix, LabelMatrix, default_ids, make_kernel, make_labels


@dataclass
class Problem:
    instance_kernel: KernelMatrix
    task_kernel: KernelMatrix
    labels: LabelMatrix


def random_psd(rng: np.random.Generator, size: int, width: int | None = None) -> np.ndarray:
    width = size + 2 if width is None else width
    features = rng.normal(size=(size, width))
    gram = features @ features.T / width
    return (gram + gram.T) / 2.0


def relative_error(actual: np.ndarray, expected: np.ndarray) -> float:
    scale = float(np.max(np.abs(expected)))
    return float(np.max(np.abs(actual - expected))) / (scale if scale > 0 else 1.0)


@pytest.fixture
def make_problem() -> Callable[..., Problem]:
    def build(seed: int, m: int, q: int, binary: bool = False) -> Problem:
        rng = np.random.default_rng(seed)
        instance_ids = default_ids("d", m)
        task_ids = default_ids("t", q)
        values = (rng.random((m, q)) < 0.4).astype(float) if binary else rng.normal(size=(m, q))
        if binary:
            values[0, 0], values[-1, -1] = 1.0, 0.0
        return Problem(
            instance_kernel=make_kernel(instance_ids, random_psd(rng, m)),
            task_kernel=make_kernel(task_ids, random_psd(rng, q)),
            labels=make_labels(instance_ids, task_ids, values),
        )

    return build
