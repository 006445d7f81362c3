"""
CLI entry point
"""
import logging
import sys
from typing import List, Optional

from dotenv import load_dotenv
from pydantic import ValidationError

from shared.config import get_settings
from shared.utils import configure_logging
from specsynth.errors import NotConvergedError, SpecSynthError
from specsynth.routes.commands import EXIT_INVALID, EXIT_NOT_CONVERGED, command_router

logger = logging.getLogger(__name__)


def run_cli(argv: Optional[List[str]] = None) -> int:
    """
    Parse argv, run the subcommand and map failures to exit codes.

    Returns:
        0 on success, 1 on a cross-check disagreement, 2 on invalid input,
        3 when learning did not converge
    """
    load_dotenv()
    configure_logging(get_settings().log)
    parser = command_router.build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_INVALID
    try:
        return args.handler(args)
    except NotConvergedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except (SpecSynthError, ValidationError, FileNotFoundError) as exc:
        logger.debug("Command %s failed", args.command, exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
