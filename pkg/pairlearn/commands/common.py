"""Shared command-layer helpers."""

from __future__ import annotations

import argparse
import sys
from typing import Any, Callable

from pairlearn.data.loader import load_bundle
from pairlearn.data.models import DatasetBundle
from pairlearn.lib.formatters import format_response
from pairlearn.runtime.response import error_response, success_response
from pairlearn.services.base import ServiceResult

MODEL_CHOICES = ("it", "kk", "okkls", "ts")
SETTING_CHOICES = ("A", "B", "C", "D")
METRIC_CHOICES = ("auto", "mse", "micro-auc", "macro-auc-rows", "macro-auc-cols", "c-index")


def nonnegative_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError as error:
        raise argparse.ArgumentTypeError(f"not a number: {text}") from error
    if not value >= 0 or value == float("inf"):
        raise argparse.ArgumentTypeError(f"must be a finite nonnegative number: {text}")
    return value


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError as error:
        raise argparse.ArgumentTypeError(f"not an integer: {text}") from error
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1: {text}")
    return value


def add_bundle_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--labels", required=True, help="Label matrix CSV (rows instances, columns tasks).")
    parser.add_argument("--instance-kernel", required=True, help="Instance Gram matrix CSV.")
    parser.add_argument("--task-kernel", required=True, help="Task Gram matrix CSV.")
    parser.add_argument("--clip-spectrum", action="store_true", help="Clamp negative kernel eigenvalues to zero.")
    parser.add_argument("--rescore-labels", action="store_true", help="Rescore binary labels to N/N+ and -N/N-.")


def add_lambda_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--lambda-d", type=nonnegative_float, default=1.0, help="Instance regularization.")
    parser.add_argument("--lambda-t", type=nonnegative_float, default=1.0, help="Task regularization.")
    parser.add_argument("--lambda", dest="lam", type=nonnegative_float, default=1.0, help="Kronecker regularization.")


def add_output_arguments(parser: argparse.ArgumentParser, default_format: str = "json") -> None:
    parser.add_argument("--output", required=True, help="Output path.")
    parser.add_argument("--format", choices=("json", "csv"), default=default_format, help="Report format.")
    parser.add_argument("--json", action="store_true", help="Print the JSON envelope instead of a text summary.")


def bundle_from_args(args: argparse.Namespace, allow_missing: bool = False) -> DatasetBundle:
    return load_bundle(
        args.labels,
        args.instance_kernel,
        args.task_kernel,
        clip_spectrum=args.clip_spectrum,
        allow_missing=allow_missing,
    )


def emit(
    result: ServiceResult[Any],
    args: argparse.Namespace,
    title: str,
    lines: Callable[[Any], list[str]],
    payload: Callable[[Any], Any] | None = None,
) -> int:
    """Print a success summary (text or JSON) or an error envelope; return the exit code."""
    if result.error is not None:
        print(error_response(result.error.code, result.error.message, result.error.detail), file=sys.stderr)
        return result.error.exit_code
    if getattr(args, "json", False):
        shaped = ServiceResult(
            data=payload(result.data) if payload else result.data,
            warning=result.warning,
            elapsed_seconds=result.elapsed_seconds,
        )
        print(success_response(shaped))
    else:
        print(format_response(title, lines(result.data), warning=result.warning))
    return 0
