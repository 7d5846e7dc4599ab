"""In-memory eigendecomposition cache keyed by kernel fingerprint."""

from __future__ import annotations

import hashlib
import logging
from threading import Lock

import numpy as np

from pairlearn.lib import kernels
from pairlearn.lib.kernels import KernelMatrix
from pairlearn.lib.linalg import EigenDecomposition

LOGGER = logging.getLogger(__name__)


def fingerprint(kernel: KernelMatrix) -> str:
    digest = hashlib.sha256()
    digest.update(repr(kernel.gram.shape).encode("ascii"))
    digest.update(np.ascontiguousarray(kernel.gram, dtype=np.float64).tobytes())
    return digest.hexdigest()


class EigenCache:
    """Thread-safe cache of kernel decompositions; each distinct Gram matrix is factored once."""

    def __init__(self, max_entries: int = 16) -> None:
        self.max_entries = max(1, max_entries)
        self._data: dict[str, EigenDecomposition] = {}
        self._lock = Lock()
        self.factorizations = 0
        self.hits = 0

    def get(self, kernel: KernelMatrix) -> EigenDecomposition:
        key = fingerprint(kernel)
        with self._lock:
            cached = self._data.get(key)
            if cached is not None:
                self.hits += 1
                return cached
            decomposition = kernels.kernel_decomposition(kernel)
            self.factorizations += 1
            if len(self._data) >= self.max_entries:
                self._data.pop(next(iter(self._data)))
            self._data[key] = decomposition
        LOGGER.debug("kernel decomposed: size=%s key=%s", kernel.size, key[:12])
        return decomposition

    def clear(self) -> None:
        with self._lock:
            self._data.clear()
