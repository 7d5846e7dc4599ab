"""Environment-driven settings."""

from __future__ import annotations

import os
from dataclasses import dataclass

from dotenv import load_dotenv


def _default_threads() -> int:
    return max(1, min(8, os.cpu_count() or 1))


@dataclass(frozen=True)
class Settings:
    """Runtime settings for the pairlearn CLI and services."""

    app_name: str = "pairlearn"
    app_version: str = "1.0.0"
    threads: int = 1
    kron_size_cap: int = 4096
    oracle_dyad_cap: int = 400
    default_grid: str = "1e-7:1e6:decade"
    log_level: str = "WARNING"
    event_log_enabled: bool = True


def _as_int(value: str | None, default: int) -> int:
    if value is None or value == "":
        return default
    try:
        return int(value)
    except ValueError:
        return default


def _as_bool(value: str | None, default: bool) -> bool:
    if value is None or value == "":
        return default
    return value.strip().lower() in {"1", "true", "yes", "on"}


def get_settings() -> Settings:
    """Load runtime settings from environment variables."""
    load_dotenv()

    return Settings(
        threads=max(1, _as_int(os.getenv("PAIRLEARN_THREADS"), _default_threads())),
        kron_size_cap=max(1, _as_int(os.getenv("PAIRLEARN_KRON_CAP"), 4096)),
        oracle_dyad_cap=max(1, _as_int(os.getenv("PAIRLEARN_ORACLE_CAP"), 400)),
        default_grid=os.getenv("PAIRLEARN_GRID", "1e-7:1e6:decade").strip() or "1e-7:1e6:decade",
        log_level=os.getenv("PAIRLEARN_LOG_LEVEL", "WARNING").strip().upper() or "WARNING",
        event_log_enabled=_as_bool(os.getenv("PAIRLEARN_EVENT_LOG"), True),
    )
