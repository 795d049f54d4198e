"""Fit the force-displacement coefficient on synthetic calibration data."""

from pathlib import Path

from trenchsense.commands.base import BaseCommand
from trenchsense.core.config import RunConfig
from trenchsense.evaluation.calibration import calibrate_grid
from trenchsense.evaluation.export import write_calibration
from trenchsense.optics.geometry import SensorGeometry


class CalibrateCommand(BaseCommand):
    """Fit the force-displacement coefficient on synthetic calibration data."""

    name = "calibrate"
    help = __doc__

    def add_arguments(self, parser):
        """Synthetic data flags."""
        parser.add_argument(
            "--true-k", type=float, help="Central stiffness to recover, in mN/mm"
        )
        parser.add_argument("--noise", type=float, help="Relative force noise")
        parser.add_argument("--repeats", type=int, help="Readings per displacement")

    def overrides(self, options):
        """Map flags onto the calibration section."""
        return {
            "calibration.true_k": options.get("true_k"),
            "calibration.noise": options.get("noise"),
            "calibration.repeats": options.get("repeats"),
        }

    def handle(self, config: RunConfig, out: Path, **options) -> str:
        """Fit every grid point and write the per-point table."""
        section = config.calibration
        records = calibrate_grid(
            SensorGeometry.from_config(config.geometry),
            section.true_k,
            section.z_levels,
            section.repeats,
            section.noise,
            seed=config.seed,
        )
        write_calibration(
            records,
            self.output(out, "calibration.csv"),
            self.output(out, "calibration.json"),
        )
        centre = records[(3, 3)]
        return (
            f"k at (3, 3) = {centre.k:.2f} mN/mm, R² = {centre.r_squared:.4f} "
            f"({len(records)} points)"
        )
