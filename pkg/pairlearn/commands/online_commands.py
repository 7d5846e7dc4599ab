"""Online mini-batch update command."""

from __future__ import annotations

import argparse
from typing import TYPE_CHECKING, Any, cast

from pairlearn.commands.common import METRIC_CHOICES, nonnegative_float, positive_int, emit
from pairlearn.data import reports
from pairlearn.data.loader import read_matrix_csv
from pairlearn.lib.formatters import line_number, line_text
from pairlearn.lib.kernels import FeatureMatrix, LabelMatrix
from pairlearn.services.base import execute
from pairlearn.services.online_service import OnlineRequest

if TYPE_CHECKING:
    from pairlearn.commands.registry import CommandServices


def register_online_commands(subparsers: Any, services: CommandServices) -> None:
    parser = subparsers.add_parser("online", help="Stream instance or task batches through the primal model.")
    parser.add_argument("--labels", required=True, help="Label matrix CSV.")
    parser.add_argument("--instance-features", required=True, help="Instance feature CSV (rows instances).")
    parser.add_argument("--task-features", required=True, help="Task feature CSV (rows tasks).")
    parser.add_argument("--lambda-d", type=nonnegative_float, default=1.0)
    parser.add_argument("--lambda-t", type=nonnegative_float, default=1.0)
    parser.add_argument("--batch-size", type=positive_int, default=1000)
    parser.add_argument("--stream", choices=("instances", "tasks"), default="instances")
    parser.add_argument("--test-fraction", type=float, default=0.2)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--metric", choices=METRIC_CHOICES, default="auto")
    parser.add_argument("--output", required=True, help="Learning-curve CSV path.")
    parser.add_argument("--json", action="store_true", help="Print the JSON envelope instead of a text summary.")

    def run_online(args: argparse.Namespace) -> int:
        def body() -> dict[str, Any]:
            labels = cast(LabelMatrix, read_matrix_csv(args.labels, "label"))
            instance_features = cast(FeatureMatrix, read_matrix_csv(args.instance_features, "feature"))
            task_features = cast(FeatureMatrix, read_matrix_csv(args.task_features, "feature"))
            request = OnlineRequest(
                lambda_d=args.lambda_d,
                lambda_t=args.lambda_t,
                batch_size=args.batch_size,
                stream=args.stream,
                test_fraction=args.test_fraction,
                seed=args.seed,
                metric=args.metric,
            )
            outcome = services.online.run(instance_features, task_features, labels, request)
            reports.write_learning_curve(args.output, outcome.curve)
            final = outcome.curve[-1]
            return {
                "stream": args.stream,
                "batches": len(outcome.curve),
                "held_out": outcome.n_test,
                "metric": outcome.metric.label,
                "final_score": final.score,
                "batch_gap": outcome.batch_gap,
                "output": args.output,
            }

        result = execute(services.ctx, "online", body)
        return emit(
            result,
            args,
            title=f"Online updates over {args.stream}",
            lines=lambda data: [
                line_text("batches", data["batches"]),
                line_text("held out", data["held_out"]),
                line_number(f"final {data['metric']}", data["final_score"]),
                line_number("relative gap to batch fit", data["batch_gap"], decimals=12),
                line_text("learning curve", data["output"]),
            ],
        )

    parser.set_defaults(handler=run_online)
