"""Fit and predict commands."""

from __future__ import annotations

import argparse
from typing import TYPE_CHECKING, Any

from pairlearn.commands.common import MODEL_CHOICES, add_bundle_arguments, add_lambda_arguments, bundle_from_args, emit
from pairlearn.data import reports
from pairlearn.lib.formatters import line_lambdas, line_number, line_text
from pairlearn.services.base import execute
from pairlearn.services.training_service import FitRequest

if TYPE_CHECKING:
    from pairlearn.commands.registry import CommandServices


def register_fit_commands(subparsers: Any, services: CommandServices) -> None:
    fit_parser = subparsers.add_parser("fit", help="Fit a dual model and write a snapshot plus report.")
    add_bundle_arguments(fit_parser)
    add_lambda_arguments(fit_parser)
    fit_parser.add_argument("--model", choices=MODEL_CHOICES, required=True)
    fit_parser.add_argument("--impute", action="store_true", help="Fill missing label cells before fitting.")
    fit_parser.add_argument("--imputed-output", help="Also write the completed label matrix here.")
    fit_parser.add_argument("--output", required=True, help="Snapshot path; .csv and .json files are written.")
    fit_parser.add_argument("--json", action="store_true", help="Print the JSON envelope instead of a text summary.")

    def run_fit(args: argparse.Namespace) -> int:
        def body() -> dict[str, Any]:
            bundle = bundle_from_args(args, allow_missing=args.impute)
            request = FitRequest(
                variant=args.model,
                lambda_d=args.lambda_d,
                lambda_t=args.lambda_t,
                lam=args.lam,
                rescore=args.rescore_labels,
                impute=args.impute,
            )
            outcome = services.training.fit(bundle, request)
            params_path, sidecar_path, report_path = services.training.save(bundle, outcome, args.output)
            if args.imputed_output:
                services.training.write_imputed(outcome, args.imputed_output)
            model = outcome.model
            return {
                "model": model.variant,
                "m": model.shape[0],
                "q": model.shape[1],
                "lambda_d": model.lambda_d,
                "lambda_t": model.lambda_t,
                "lambda": model.lam,
                "training_mse": outcome.training_mse,
                "imputed_cells": outcome.imputed_cells,
                "params_file": str(params_path),
                "sidecar_file": str(sidecar_path),
                "report_file": str(report_path),
            }

        result = execute(services.ctx, "fit", body, model=args.model)
        return emit(
            result,
            args,
            title=f"Fitted {args.model.upper()} model",
            lines=lambda data: [
                line_text("dyads", f"{data['m']} x {data['q']}"),
                line_lambdas(data["lambda_d"], data["lambda_t"], data["lambda"]),
                line_number("training mse", data["training_mse"]),
                line_text("imputed cells", data["imputed_cells"]),
                line_text("parameters", data["params_file"]),
                line_text("report", data["report_file"]),
            ],
        )

    fit_parser.set_defaults(handler=run_fit)

    predict_parser = subparsers.add_parser("predict", help="Predict from a saved model snapshot.")
    predict_parser.add_argument("--model-file", required=True, help="Snapshot sidecar JSON or parameter CSV.")
    predict_parser.add_argument("--instance-kernel", required=True, help="Test-vs-training instance kernel CSV.")
    predict_parser.add_argument("--task-kernel", help="Test-vs-training task kernel CSV (optional for IT).")
    predict_parser.add_argument("--output", required=True, help="Prediction CSV path.")
    predict_parser.add_argument("--json", action="store_true", help="Print the JSON envelope instead of a text summary.")

    def run_predict(args: argparse.Namespace) -> int:
        def body() -> dict[str, Any]:
            outcome = services.training.predict(args.model_file, args.instance_kernel, args.task_kernel)
            reports.write_predictions(args.output, outcome.instance_ids, outcome.task_ids, outcome.values)
            return {
                "instances": len(outcome.instance_ids),
                "tasks": len(outcome.task_ids),
                "output": args.output,
            }

        result = execute(services.ctx, "predict", body)
        return emit(
            result,
            args,
            title="Predictions written",
            lines=lambda data: [
                line_text("dyads", f"{data['instances']} x {data['tasks']}"),
                line_text("output", data["output"]),
            ],
        )

    predict_parser.set_defaults(handler=run_predict)
