"""Response shaping helpers for CLI output."""

from __future__ import annotations

import json
import time
from dataclasses import asdict, is_dataclass
from typing import Any

import numpy as np

from pairlearn.services.base import ServiceResult


def _convert_data(data: Any) -> Any:
    if is_dataclass(data) and not isinstance(data, type):
        return _convert_data(asdict(data))
    if isinstance(data, np.ndarray):
        return data.tolist()
    if isinstance(data, np.generic):
        return data.item()
    if isinstance(data, (list, tuple)):
        return [_convert_data(item) for item in data]
    if isinstance(data, dict):
        return {key: _convert_data(value) for key, value in data.items()}
    return data


def success_response(result: ServiceResult[Any]) -> str:
    payload: dict[str, Any] = {
        "data": _convert_data(result.data),
        "elapsed_seconds": round(result.elapsed_seconds, 6),
        "timestamp": int(time.time()),
    }
    if result.warning:
        payload["warning"] = result.warning
    return json.dumps(payload, ensure_ascii=True)


def error_response(code: str, message: str, detail: str | None = None) -> str:
    payload: dict[str, Any] = {
        "error": True,
        "code": code,
        "message": message,
        "timestamp": int(time.time()),
    }
    if detail:
        payload["detail"] = detail
    return json.dumps(payload, ensure_ascii=True)
