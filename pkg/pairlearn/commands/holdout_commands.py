"""Leave-one-out and grid search commands."""

from __future__ import annotations

import argparse
from pathlib import Path
from typing import TYPE_CHECKING, Any

from pairlearn.commands.common import (
    METRIC_CHOICES,
    SETTING_CHOICES,
    add_bundle_arguments,
    add_lambda_arguments,
    add_output_arguments,
    bundle_from_args,
    emit,
    positive_int,
)
from pairlearn.data import reports
from pairlearn.data.models import EvaluationReport, GridRecord
from pairlearn.lib.formatters import line_lambdas, line_number, line_text
from pairlearn.services.base import execute
from pairlearn.services.evaluation_service import parse_grid

if TYPE_CHECKING:
    from pairlearn.commands.registry import CommandServices

LOO_MODELS = ("it", "kk", "ts")


def _add_evaluation_arguments(parser: argparse.ArgumentParser) -> None:
    add_bundle_arguments(parser)
    parser.add_argument("--model", choices=LOO_MODELS, required=True)
    parser.add_argument("--setting", choices=SETTING_CHOICES, type=str.upper, required=True)
    parser.add_argument("--metric", choices=METRIC_CHOICES, default="auto")
    parser.add_argument("--oracle", action="store_true", help="Retrain for every held-out unit instead of the shortcut.")
    add_output_arguments(parser)


def register_holdout_commands(subparsers: Any, services: CommandServices) -> None:
    loo_parser = subparsers.add_parser("loo", help="Leave-one-out predictions and score for one setting.")
    _add_evaluation_arguments(loo_parser)
    add_lambda_arguments(loo_parser)
    loo_parser.add_argument("--suspects", type=positive_int, help="Write the N largest leave-one-out residuals.")
    loo_parser.add_argument("--predictions", help="Also write the leave-one-out prediction matrix here.")

    def run_loo(args: argparse.Namespace) -> int:
        def body() -> dict[str, Any]:
            bundle = bundle_from_args(args)
            outcome = services.evaluation.loo(
                bundle,
                args.model,
                args.setting,
                lambda_d=args.lambda_d,
                lambda_t=args.lambda_t,
                lam=args.lam,
                metric=args.metric,
                oracle=args.oracle,
                rescore=args.rescore_labels,
                suspects=args.suspects or 0,
            )
            result = outcome.result
            record = GridRecord(
                lambda_d=result.lambda_d,
                lambda_t=result.lambda_t,
                lam=result.lam if result.model_variant == "KK" else None,
                score=outcome.score,
            )
            m, q = bundle.shape
            report = EvaluationReport(
                model=args.model,
                setting=result.setting,
                metric=outcome.metric.label,
                grid=[record],
                best=record,
                timing_seconds=outcome.timing_seconds,
                m=m,
                q=q,
                provenance=[item.path for item in bundle.provenance],
            )
            reports.write_report(report, args.output, args.format)
            suspects_path = None
            if args.suspects:
                suspects_path = str(Path(args.output).with_suffix(".suspects.csv"))
                reports.write_suspects(suspects_path, outcome.suspects)
            if args.predictions:
                reports.write_predictions(args.predictions, bundle.labels.instance_ids, bundle.labels.task_ids, result.predictions)
            return {
                "model": args.model,
                "setting": result.setting,
                "metric": outcome.metric.label,
                "score": outcome.score,
                "lambda_d": record.lambda_d,
                "lambda_t": record.lambda_t,
                "lambda": record.lam,
                "report_file": args.output,
                "suspects_file": suspects_path,
            }

        result = execute(services.ctx, "loo", body, model=args.model, setting=args.setting)
        return emit(
            result,
            args,
            title=f"Leave-one-out {args.model.upper()} setting {args.setting}",
            lines=lambda data: [
                line_lambdas(data["lambda_d"], data["lambda_t"], data["lambda"]),
                line_number(data["metric"], data["score"]),
                line_text("report", data["report_file"]),
            ],
        )

    loo_parser.set_defaults(handler=run_loo)

    grid_parser = subparsers.add_parser("grid", help="Grid search over lambda values with leave-one-out scoring.")
    _add_evaluation_arguments(grid_parser)
    grid_parser.add_argument("--grid", help="'low:high:decade' or a comma-separated list.")
    grid_parser.add_argument("--diagonal", action="store_true", help="TS only: tie lambda_d and lambda_t together.")

    def run_grid(args: argparse.Namespace) -> int:
        def body() -> dict[str, Any]:
            grid = parse_grid(args.grid or services.ctx.settings.default_grid, joint=not args.diagonal)
            bundle = bundle_from_args(args)
            report = services.evaluation.grid(
                bundle,
                args.model,
                args.setting,
                grid,
                metric=args.metric,
                oracle=args.oracle,
                rescore=args.rescore_labels,
            )
            reports.write_report(report, args.output, args.format)
            best = report.best
            return {
                "model": args.model,
                "setting": report.setting,
                "metric": report.metric,
                "points": len(report.grid),
                "best": None if best is None else {
                    "lambda_d": best.lambda_d,
                    "lambda_t": best.lambda_t,
                    "lambda": best.lam,
                    "score": best.score,
                },
                "timing_seconds": report.timing_seconds,
                "report_file": args.output,
            }

        result = execute(services.ctx, "grid", body, model=args.model, setting=args.setting)
        return emit(
            result,
            args,
            title=f"Grid search {args.model.upper()} setting {args.setting}",
            lines=lambda data: [
                line_text("points", data["points"]),
                line_lambdas(data["best"]["lambda_d"], data["best"]["lambda_t"], data["best"]["lambda"]),
                line_number(f"best {data['metric']}", data["best"]["score"]),
                line_number("seconds", data["timing_seconds"], decimals=3),
                line_text("report", data["report_file"]),
            ],
        )

    grid_parser.set_defaults(handler=run_grid)
