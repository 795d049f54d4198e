"""Central brightness of rendered frames over a displacement sweep."""

import json
from dataclasses import asdict
from pathlib import Path

from trenchsense.commands.base import BaseCommand
from trenchsense.core.config import RunConfig
from trenchsense.core.exceptions import DataError
from trenchsense.mechanics.types import MaterialParams
from trenchsense.optics.calibration import (
    brightness_table,
    calibrate_gain,
    write_brightness_csv,
)
from trenchsense.optics.geometry import SensorGeometry
from trenchsense.optics.render import RenderConfig

DISPLACEMENTS = (0.5, 1.0, 1.5)


class BrightnessCommand(BaseCommand):
    """Central brightness of rendered frames over a displacement sweep."""

    name = "brightness"
    help = __doc__

    def add_arguments(self, parser):
        """Point and calibration flags."""
        parser.add_argument("--grid-x", type=float, default=3.0)
        parser.add_argument("--grid-y", type=float, default=3.0)
        parser.add_argument(
            "--no-calibrate",
            action="store_true",
            help="Keep the configured gain instead of fitting the 3.2 ratio",
        )

    def handle(self, config: RunConfig, out: Path, **options) -> str:
        """Calibrate the gain, render the sweep and write the table."""
        geometry = SensorGeometry.from_config(config.geometry)
        material = MaterialParams.from_config(config.material)
        cfg = RenderConfig.from_config(config.render, seed=config.seed)
        point = (options.get("grid_x", 3.0), options.get("grid_y", 3.0))
        k = config.mechanics.stiffness_k
        if not options.get("no_calibrate"):
            cfg = calibrate_gain(geometry, material, cfg, point=point, k=k)

        rows = brightness_table(geometry, material, cfg, DISPLACEMENTS, point, k)
        write_brightness_csv(rows, self.output(out, "brightness.csv"))
        path = self.output(out, "render_parameters.json")
        try:
            path.write_text(
                json.dumps(asdict(cfg), indent=2) + "\n", encoding="utf-8"
            )
        except OSError as e:
            raise DataError(f"Cannot write {path}: {e}") from e

        table = ", ".join(
            f"{row.displacement_z:g} mm: {row.brightness:.1f}" for row in rows
        )
        return f"Brightness {table}; ratio {rows[-1].ratio:.2f} (gain {cfg.gain:.4f})"
