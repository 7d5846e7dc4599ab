"""Application entrypoint for the pairlearn command line."""

from __future__ import annotations

import logging
import sys
from collections.abc import Sequence

from pairlearn.commands.registry import build_command_services, build_parser
from pairlearn.config.settings import get_settings
from pairlearn.runtime.response import error_response
from pairlearn.services.base import EXIT_CODES, ServiceContext

LOGGER = logging.getLogger(__name__)


def main(argv: Sequence[str] | None = None) -> int:
    settings = get_settings()
    logging.basicConfig(level=getattr(logging, settings.log_level, logging.WARNING), stream=sys.stderr)
    ctx = ServiceContext.from_settings(settings)
    services = build_command_services(ctx)
    parser = build_parser(services, settings)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_:
        # argparse exits 2 on bad arguments; usage errors map to 1 here.
        code = exit_.code if isinstance(exit_.code, int) else 1
        return EXIT_CODES["usage"] if code != 0 else 0
    handler = getattr(args, "handler", None)
    if handler is None:
        print(error_response("USAGE", "A command is required.", parser.format_usage().strip()), file=sys.stderr)
        return EXIT_CODES["usage"]
    LOGGER.debug("dispatching command: command=%s threads=%s", args.command, settings.threads)
    return int(handler(args))


if __name__ == "__main__":
    raise SystemExit(main())
