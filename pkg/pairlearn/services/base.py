"""Shared service orchestration helpers."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from typing import Callable, Generic, TypeVar

from pairlearn.cache.eigen_cache import EigenCache
from pairlearn.config.settings import Settings
from pairlearn.lib.errors import ErrorCategory, PairlearnError, error_category
from pairlearn.runtime.monitoring import RunMetrics, log_command_event

LOGGER = logging.getLogger(__name__)
T = TypeVar("T")
EXIT_CODES: dict[ErrorCategory, int] = {"usage": 1, "data": 2, "numeric": 3}


@dataclass
class ErrorEnvelope:
    code: str
    message: str
    category: ErrorCategory = "data"
    detail: str | None = None

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.category]


@dataclass
class ServiceResult(Generic[T]):
    data: T | None
    warning: str | None = None
    error: ErrorEnvelope | None = None
    elapsed_seconds: float = 0.0


@dataclass
class ServiceContext:
    settings: Settings
    cache: EigenCache
    metrics: RunMetrics

    @classmethod
    def from_settings(cls, settings: Settings) -> ServiceContext:
        return cls(settings=settings, cache=EigenCache(), metrics=RunMetrics())


def envelope_from_error(error: PairlearnError) -> ErrorEnvelope:
    return ErrorEnvelope(code=error.code, message=error.message, category=error_category(error.code), detail=error.detail)


def execute(
    ctx: ServiceContext,
    command: str,
    call: Callable[[], T],
    model: str | None = None,
    setting: str | None = None,
) -> ServiceResult[T]:
    """Run one command body, turning PairlearnError into an error envelope and logging the event."""
    started = time.perf_counter()
    factorizations_before = ctx.cache.factorizations
    try:
        value = call()
    except PairlearnError as error:
        latency_ms = (time.perf_counter() - started) * 1000.0
        factorizations = ctx.cache.factorizations - factorizations_before
        ctx.metrics.record(command, latency_ms, success=False, factorizations=factorizations)
        if ctx.settings.event_log_enabled:
            log_command_event(
                command,
                latency_ms,
                success=False,
                model=model,
                setting=setting,
                factorizations=factorizations,
                error_code=error.code,
            )
        LOGGER.debug("command failed: command=%s code=%s", command, error.code)
        return ServiceResult(data=None, error=envelope_from_error(error), elapsed_seconds=latency_ms / 1000.0)
    latency_ms = (time.perf_counter() - started) * 1000.0
    factorizations = ctx.cache.factorizations - factorizations_before
    ctx.metrics.record(command, latency_ms, success=True, factorizations=factorizations)
    if ctx.settings.event_log_enabled:
        log_command_event(command, latency_ms, success=True, model=model, setting=setting, factorizations=factorizations)
    return ServiceResult(data=value, elapsed_seconds=latency_ms / 1000.0)
