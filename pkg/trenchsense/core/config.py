"""Application configuration and settings."""

import logging
import logging.config
import re
import tomllib
from functools import lru_cache
from pathlib import Path
from typing import Any, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from trenchsense.core.exceptions import ConfigError

logger = logging.getLogger(__name__)


class Settings(BaseSettings):
    """Process settings loaded from environment variables and .env file."""

    model_config = SettingsConfigDict(env_file=".env", env_prefix="TRENCHSENSE_")

    # Root directory under which every command writes its outputs
    output_root: Path = Path("runs")
    log_level: str = "INFO"
    default_jobs: int = 1

    # Sentry
    sentry_is_enabled: bool = False
    sentry_dsn: Optional[str] = None


@lru_cache
def get_settings():
    """Load and cache process settings."""
    return Settings()


def get_logging_config(level: str = "INFO") -> dict:
    """Build the dictConfig used by the command line entry point."""
    return {
        "version": 1,
        "disable_existing_loggers": False,
        "formatters": {
            "verbose": {
                "format": "%(asctime)s %(levelname)s %(name)s: %(message)s",
            },
        },
        "handlers": {
            "console": {
                "class": "logging.StreamHandler",
                "formatter": "verbose",
            },
        },
        "loggers": {
            "trenchsense": {
                "handlers": ["console"],
                "level": level,
                "propagate": False,
            },
        },
        "root": {"handlers": ["console"], "level": "WARNING"},
    }


def configure_logging(level: str = "INFO"):
    """Install the console logging configuration."""
    logging.config.dictConfig(get_logging_config(level.upper()))


class Section(BaseModel):
    """Base of every run configuration section: unknown keys are rejected."""

    model_config = ConfigDict(extra="forbid", frozen=True)


class GeometrySection(Section):
    """Cross-trench layout, in millimetres."""

    pitch: float = 2.0
    cross_arm: float = 1.5
    kerf: float = 0.2
    window: float = 16.0


class MaterialSection(Section):
    """Film material constants, in SI units."""

    young_modulus_eff: float = 1.2e6
    film_thickness: float = 1.0e-3
    composite_thickness: float = 230e-6
    trench_depth: float = 523e-6


class MechanicsSection(Section):
    """Strip beam model and oracle settings."""

    # Stress-free triangle height in metres, defaults to the trench depth
    alpha: Optional[float] = None
    stiffness_k: float = 85.4
    oracle_nodes: int = 801
    field_nodes: int = 161
    sweep_max_force: float = 80.0
    sweep_steps: int = 9


class RenderSection(Section):
    """Camera model."""

    width: int = 300
    height: int = 300
    px_per_mm: float = 15.0
    background_value: float = 0.0
    baseline_value: float = 20.0
    gain: float = 0.6
    gamma: float = 1.0
    noise_sigma: float = 2.0


class DatasetSection(Section):
    """Synthetic dataset sweep."""

    z_min: float = 0.1
    z_max: float = 1.5
    z_steps: int = 11
    repeats: int = 10
    include_midpoints: bool = True
    write_preview: bool = False


class AugmentSection(Section):
    """Training-time camera jitter."""

    enabled: bool = True
    max_translation: float = 2.0
    max_rotation: float = 3.0
    probability: float = 0.5


class TrainSection(Section):
    """Optimisation settings."""

    model: str = "CNN_1"
    optimizer: Literal["adam", "sgd-momentum"] = "adam"
    learning_rate: float = 1e-3
    momentum: float = 0.9
    batch_size: int = 32
    epochs: int = 50


class EvalSection(Section):
    """Metrics and residual analysis."""

    histogram_bins: int = 41
    histogram_range: float = 0.25
    band: float = 0.1
    coverage: float = 0.95


class CalibrationSection(Section):
    """Synthetic force calibration."""

    z_levels: List[float] = Field(default_factory=lambda: [0.5, 1.0, 1.5, 1.75])
    repeats: int = 10
    noise: float = 0.028
    true_k: float = 85.4


class ReplaySection(Section):
    """Temporal replay track."""

    frames: int = 500
    fps: float = 30.0
    grid_x: float = 3.0
    grid_y: float = 3.0
    z_min: float = 0.2
    z_max: float = 1.4
    frequency: float = 0.5


class RunConfig(BaseModel):
    """Resolved configuration of one command run."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    seed: int = 7
    geometry: GeometrySection = GeometrySection()
    material: MaterialSection = MaterialSection()
    mechanics: MechanicsSection = MechanicsSection()
    render: RenderSection = RenderSection()
    dataset: DatasetSection = DatasetSection()
    augment: AugmentSection = AugmentSection()
    train: TrainSection = TrainSection()
    eval: EvalSection = EvalSection()
    calibration: CalibrationSection = CalibrationSection()
    replay: ReplaySection = ReplaySection()

    def write(self, directory: Path) -> Path:
        """Write the resolved configuration next to the outputs of a run."""
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / "resolved_config.json"
        path.write_text(self.model_dump_json(indent=2) + "\n", encoding="utf-8")
        return path


_SECTION_RE = re.compile(r"^\s*\[\s*([A-Za-z0-9_.-]+)\s*\]")
_KEY_RE = re.compile(r"^\s*([A-Za-z0-9_-]+)\s*=")


def _locate(text: str, loc: tuple) -> Optional[int]:
    """Find the 1-based line where a dotted key is defined in a TOML text."""
    if not loc:
        return None
    section = ".".join(str(part) for part in loc[:-1])
    key = str(loc[-1])
    current = ""
    for number, line in enumerate(text.splitlines(), start=1):
        header = _SECTION_RE.match(line)
        if header:
            current = header.group(1)
            if not section and current == key:
                return number
            continue
        match = _KEY_RE.match(line)
        if match and match.group(1) == key and current == section:
            return number
    return None


def _merge(base: dict, overrides: dict) -> dict:
    """Merge dotted-key overrides into a nested dict."""
    merged = {
        name: dict(value) if isinstance(value, dict) else value
        for name, value in base.items()
    }
    for dotted, value in overrides.items():
        if value is None:
            continue
        target = merged
        *parents, leaf = dotted.split(".")
        for parent in parents:
            target = target.setdefault(parent, {})
        target[leaf] = value
    return merged


def load_run_config(
    path: Optional[Path] = None, overrides: Optional[dict[str, Any]] = None
) -> RunConfig:
    """Read a TOML run configuration and apply flag overrides.

    Args:
        path: TOML file; when None the defaults are used.
        overrides: Values keyed by dotted name, e.g. ``{"train.epochs": 0}``.
            ``None`` values are ignored so that unset flags keep file values.

    Raises:
        ConfigError: when the file is missing, not valid TOML, or holds an
            unknown or invalid key. The message names the key and its line.
    """
    text = ""
    data: dict = {}
    if path is not None:
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigError(f"Cannot read configuration file {path}: {e}") from e
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as e:
            raise ConfigError(f"{path}: {e}") from e

    try:
        config = RunConfig.model_validate(_merge(data, overrides or {}))
    except ValidationError as e:
        problems = []
        for error in e.errors():
            key = ".".join(str(part) for part in error["loc"])
            line = _locate(text, error["loc"])
            where = f"{path}:{line}: " if line else ""
            if error["type"] == "extra_forbidden":
                problems.append(f"{where}unknown key '{key}'")
            else:
                problems.append(f"{where}invalid value for '{key}': {error['msg']}")
        raise ConfigError("; ".join(problems)) from e

    logger.debug("Loaded run configuration from %s", path or "defaults")
    return config
