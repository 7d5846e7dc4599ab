"""Structured command events and run metrics aggregation."""

from __future__ import annotations

import json
import sys
import threading
import time
from dataclasses import dataclass


@dataclass
class RunSnapshot:
    uptime_seconds: float
    total_commands: int
    failure_rate: float
    avg_latency_ms: float
    factorizations: int


class RunMetrics:
    def __init__(self, started_at: float | None = None) -> None:
        self.started_at = started_at or time.time()
        self._lock = threading.Lock()
        self.total_commands = 0
        self.failed_commands = 0
        self.total_latency_ms = 0.0
        self.factorizations = 0
        self.command_counts: dict[str, int] = {}

    def record(self, command: str, latency_ms: float, success: bool, factorizations: int = 0) -> None:
        with self._lock:
            self.total_commands += 1
            self.command_counts[command] = self.command_counts.get(command, 0) + 1
            if not success:
                self.failed_commands += 1
            self.total_latency_ms += max(0.0, latency_ms)
            self.factorizations += max(0, factorizations)

    def snapshot(self) -> RunSnapshot:
        with self._lock:
            commands = self.total_commands
            avg_latency = (self.total_latency_ms / commands) if commands else 0.0
            failure_rate = (self.failed_commands / commands) if commands else 0.0
            factorizations = self.factorizations
        return RunSnapshot(
            uptime_seconds=max(0.0, time.time() - self.started_at),
            total_commands=commands,
            failure_rate=failure_rate,
            avg_latency_ms=avg_latency,
            factorizations=factorizations,
        )


def log_command_event(
    command: str,
    latency_ms: float,
    success: bool,
    model: str | None = None,
    setting: str | None = None,
    factorizations: int = 0,
    error_code: str | None = None,
    warning: str | None = None,
) -> None:
    payload: dict[str, object] = {
        "command": command,
        "model": model,
        "setting": setting,
        "latency_ms": round(latency_ms, 3),
        "success": success,
        "factorizations": factorizations,
        "timestamp": int(time.time()),
    }
    if error_code:
        payload["error_code"] = error_code
    if warning:
        payload["warning"] = warning
    print(json.dumps(payload, ensure_ascii=True), file=sys.stderr)
