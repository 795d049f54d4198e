"""Base class of the command line subcommands."""

import argparse
import logging
import shutil
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from trenchsense.core.config import RunConfig, get_settings, load_run_config
from trenchsense.core.exceptions import TrenchsenseError

logger = logging.getLogger(__name__)


class CommandError(Exception):
    """Exception raised to abort a command with a given exit code."""

    def __init__(self, message: str, exit_code: int = 1):
        """Store the exit code along with the message."""
        super().__init__(message)
        self.exit_code = exit_code


class CommandParser(argparse.ArgumentParser):
    """Argument parser exiting with status 1 on usage errors."""

    def error(self, message):
        """Print the usage and exit with the usage status."""
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


class BaseCommand:
    """A pipeline stage run from the command line.

    Subclasses set ``name`` and ``help``, declare their flags in
    ``add_arguments``, map flags onto configuration keys in ``overrides`` and
    do their work in ``handle``, which returns the summary line.
    """

    name = ""
    help = ""

    def __init__(self, stdout=None, stderr=None):
        """Bind the output streams."""
        self.stdout = stdout or sys.stdout
        self.stderr = stderr or sys.stderr
        self.outputs: List[Path] = []

    def add_arguments(self, parser: argparse.ArgumentParser):
        """Add the command specific flags."""

    def overrides(self, options: Dict[str, Any]) -> Dict[str, Any]:
        """Dotted configuration keys set by the command specific flags."""
        return {}

    def handle(self, config: RunConfig, out: Path, **options) -> str:
        """Run the command and return its summary line."""
        raise NotImplementedError

    def output(self, out: Path, name: str) -> Path:
        """Register an output file so that a failed run removes it."""
        path = out / name
        self.outputs.append(path)
        return path

    def execute(self, options: Dict[str, Any]) -> int:
        """Resolve the configuration, run ``handle`` and map errors to exit codes."""
        out = Path(options.get("out") or get_settings().output_root / self.name)
        created = not out.exists()
        try:
            config = load_run_config(
                options.get("config"),
                {"seed": options.get("seed"), **self.overrides(options)},
            )
            out.mkdir(parents=True, exist_ok=True)
            self.outputs.append(config.write(out))
            summary = self.handle(config, out, **options)
        except CommandError as e:
            status, message = e.exit_code, str(e)
        except TrenchsenseError as e:
            logger.debug("%s failed", self.name, exc_info=True)
            status, message = e.exit_code, str(e)
        except ValidationError as e:
            logger.debug("%s failed", self.name, exc_info=True)
            error = e.errors()[0]
            location = " ".join([e.title, *(str(part) for part in error["loc"])])
            status, message = 1, f"invalid {location}: {error['msg']}"
        except OSError as e:
            status, message = 2, str(e)
        except BaseException:
            self._cleanup(out, created)
            raise
        else:
            self.stdout.write(f"{summary}\n")
            return 0
        self._cleanup(out, created)
        self.stderr.write(f"Error: {message}\n")
        return status

    def _cleanup(self, out: Path, created: bool):
        """Remove what a failed run wrote."""
        if created and out.exists():
            shutil.rmtree(out, ignore_errors=True)
            return
        for path in self.outputs:
            if path.is_file():
                path.unlink()


def require_file(path: Optional[Path], what: str) -> Path:
    """Check that an upstream artifact exists.

    Raises:
        CommandError: naming the missing input, with the data error status.
    """
    if path is None:
        raise CommandError(f"missing input: {what} (pass it explicitly)", exit_code=2)
    path = Path(path)
    if not path.is_file():
        raise CommandError(f"missing input: {what} {path} does not exist", exit_code=2)
    return path
