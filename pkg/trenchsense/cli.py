"""Command line entry point: ``trenchsense <command> [options]``."""

import logging
import sys
from pathlib import Path
from typing import Dict, Optional, Sequence, Type

import sentry_sdk

from trenchsense import __version__
from trenchsense.commands.base import BaseCommand, CommandParser
from trenchsense.commands.brightness import BrightnessCommand
from trenchsense.commands.calibrate import CalibrateCommand
from trenchsense.commands.compare import CompareCommand
from trenchsense.commands.dataset import DatasetCommand
from trenchsense.commands.evaluate import EvalCommand
from trenchsense.commands.mechanics import MechanicsCommand
from trenchsense.commands.replay import ReplayCommand
from trenchsense.commands.train import TrainCommand
from trenchsense.core.config import configure_logging, get_settings

logger = logging.getLogger(__name__)

COMMANDS: Dict[str, Type[BaseCommand]] = {
    command.name: command
    for command in (
        MechanicsCommand,
        DatasetCommand,
        TrainCommand,
        EvalCommand,
        CompareCommand,
        CalibrateCommand,
        ReplayCommand,
        BrightnessCommand,
    )
}


def _add_global_arguments(parser):
    parser.add_argument("--config", type=Path, help="TOML run configuration")
    parser.add_argument("--seed", type=int, help="Master seed of the run")
    parser.add_argument("--jobs", type=int, help="Worker processes")
    parser.add_argument("--out", type=Path, help="Output directory")
    parser.add_argument(
        "-v", "--verbose", action="store_true", help="Log debug messages"
    )


def build_parser() -> CommandParser:
    """Parser with one subcommand per pipeline stage."""
    parser = CommandParser(
        prog="trenchsense",
        description="Digital twin of a micro-trench vision-based tactile sensor.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    subparsers = parser.add_subparsers(
        dest="command", required=True, parser_class=CommandParser
    )
    for name, command in COMMANDS.items():
        subparser = subparsers.add_parser(
            name, help=command.help, description=command.help
        )
        _add_global_arguments(subparser)
        command().add_arguments(subparser)
    return parser


def main(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    """Parse the arguments, run the command and return its exit status."""
    options = vars(build_parser().parse_args(argv))
    settings = get_settings()
    configure_logging("DEBUG" if options.get("verbose") else settings.log_level)

    if settings.sentry_dsn and settings.sentry_is_enabled:
        sentry_sdk.init(dsn=settings.sentry_dsn, enable_tracing=True)

    command = COMMANDS[options.pop("command")](stdout=stdout, stderr=stderr)
    logger.debug("Running %s with %s", command.name, options)
    return command.execute(options)


if __name__ == "__main__":
    sys.exit(main())
