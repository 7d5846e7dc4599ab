"""Fit session over one (K, G) pair: decompose once, fit and score for any lambda."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from pairlearn.cache.eigen_cache import EigenCache
from pairlearn.learning import models
from pairlearn.learning.models import DualModel
from pairlearn.lib.filters import hat_matrix
from pairlearn.lib.kernels import KernelMatrix, LabelMatrix
from pairlearn.lib.linalg import EigenDecomposition


@dataclass
class FitSession:
    instance_kernel: KernelMatrix
    task_kernel: KernelMatrix
    labels: LabelMatrix
    cache: EigenCache = field(default_factory=EigenCache)

    def __post_init__(self) -> None:
        models.check_alignment(self.labels, self.instance_kernel, self.task_kernel)

    @property
    def eig_k(self) -> EigenDecomposition:
        return self.cache.get(self.instance_kernel)

    @property
    def eig_g(self) -> EigenDecomposition:
        return self.cache.get(self.task_kernel)

    def fit_it(self, lambda_d: float) -> DualModel:
        return models.fit_it(self.instance_kernel, self.labels, lambda_d, eig_k=self.eig_k)

    def fit_kk(self, lam: float) -> DualModel:
        return models.fit_kk(self.instance_kernel, self.task_kernel, self.labels, lam, eig_k=self.eig_k, eig_g=self.eig_g)

    def fit_okkls(self) -> DualModel:
        return models.fit_okkls(self.instance_kernel, self.task_kernel, self.labels, eig_k=self.eig_k, eig_g=self.eig_g)

    def fit_ts(self, lambda_d: float, lambda_t: float) -> DualModel:
        return models.fit_ts(
            self.instance_kernel,
            self.task_kernel,
            self.labels,
            lambda_d,
            lambda_t,
            eig_k=self.eig_k,
            eig_g=self.eig_g,
        )

    def instance_hat(self, lambda_d: float) -> np.ndarray:
        return hat_matrix(self.eig_k, lambda_d)

    def task_hat(self, lambda_t: float) -> np.ndarray:
        return hat_matrix(self.eig_g, lambda_t)

    def training_predictions(self, model: DualModel) -> np.ndarray:
        if model.variant == "IT":
            return models.predict(model, self.instance_kernel.gram)
        return models.predict(model, self.instance_kernel.gram, self.task_kernel.gram)
