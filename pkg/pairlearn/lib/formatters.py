"""Plain-text summary formatting for CLI output."""

from __future__ import annotations


def _fmt_number(value: float | None, decimals: int = 6) -> str:
    if value is None:
        return "n/a"
    return f"{value:.{decimals}f}"


def _fmt_lambda(value: float | None) -> str:
    if value is None:
        return "n/a"
    return f"{value:.3g}"


def format_response(title: str, lines: list[str], warning: str | None = None) -> str:
    chunks: list[str] = [title]
    if warning:
        chunks.append(f"Warning: {warning}")
    chunks.extend(lines)
    return "\n".join(chunks)


def line_number(label: str, value: float | None, decimals: int = 6) -> str:
    return f"{label}: {_fmt_number(value, decimals)}"


def line_lambdas(lambda_d: float | None, lambda_t: float | None, lam: float | None = None) -> str:
    parts = [f"lambda_d={_fmt_lambda(lambda_d)}", f"lambda_t={_fmt_lambda(lambda_t)}"]
    if lam is not None:
        parts.append(f"lambda={_fmt_lambda(lam)}")
    return "hyperparameters: " + ", ".join(parts)


def line_text(label: str, value: object) -> str:
    return f"{label}: {value}"
