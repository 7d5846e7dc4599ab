"""Command registry entrypoint."""

from __future__ import annotations

import argparse
from dataclasses import dataclass

from pairlearn.commands.fit_commands import register_fit_commands
from pairlearn.commands.holdout_commands import register_holdout_commands
from pairlearn.commands.online_commands import register_online_commands
from pairlearn.config.settings import Settings
from pairlearn.services.base import ServiceContext
from pairlearn.services.evaluation_service import EvaluationService
from pairlearn.services.online_service import OnlineService
from pairlearn.services.training_service import TrainingService


@dataclass
class CommandServices:
    ctx: ServiceContext
    training: TrainingService
    evaluation: EvaluationService
    online: OnlineService


def build_command_services(ctx: ServiceContext) -> CommandServices:
    return CommandServices(
        ctx=ctx,
        training=TrainingService(ctx),
        evaluation=EvaluationService(ctx),
        online=OnlineService(ctx),
    )


def register_all_commands(subparsers: argparse._SubParsersAction, services: CommandServices) -> None:
    register_fit_commands(subparsers, services)
    register_holdout_commands(subparsers, services)
    register_online_commands(subparsers, services)


def build_parser(services: CommandServices, settings: Settings) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=settings.app_name,
        description="Kernel-based pairwise learning with closed-form leave-one-out.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {settings.app_version}")
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
    register_all_commands(subparsers, services)
    return parser
