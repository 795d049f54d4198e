"""Generate and split a labelled synthetic dataset."""

from pathlib import Path

from trenchsense.commands.base import BaseCommand
from trenchsense.core.config import RunConfig, get_settings
from trenchsense.core.utils import Timeit
from trenchsense.dataset.generator import Sweep, generate
from trenchsense.dataset.manifest import split
from trenchsense.mechanics.field import default_contact_grid
from trenchsense.mechanics.types import MaterialParams
from trenchsense.optics.geometry import SensorGeometry
from trenchsense.optics.render import RenderConfig


class DatasetCommand(BaseCommand):
    """Generate and split a labelled synthetic dataset."""

    name = "dataset"
    help = __doc__

    def add_arguments(self, parser):
        """Sweep flags."""
        parser.add_argument("--repeats", type=int, help="Frames per (point, z)")
        parser.add_argument("--z-steps", type=int, help="Displacement levels")
        parser.add_argument(
            "--no-midpoints",
            action="store_true",
            help="Only load the 25 cross centres",
        )
        parser.add_argument(
            "--preview", action="store_true", help="Also write preview.pgm"
        )

    def overrides(self, options):
        """Map flags onto the dataset section."""
        return {
            "dataset.repeats": options.get("repeats"),
            "dataset.z_steps": options.get("z_steps"),
            "dataset.include_midpoints": (
                False if options.get("no_midpoints") else None
            ),
            "dataset.write_preview": True if options.get("preview") else None,
        }

    def handle(self, config: RunConfig, out: Path, **options) -> str:
        """Render every sample then write the split manifest."""
        geometry = SensorGeometry.from_config(config.geometry)
        material = MaterialParams.from_config(config.material)
        render_config = RenderConfig.from_config(config.render, seed=config.seed)
        grid = default_contact_grid(config.dataset.include_midpoints)
        jobs = options.get("jobs") or get_settings().default_jobs

        with Timeit(self.stdout, "Rendering samples"):
            manifest = generate(
                geometry,
                material,
                render_config,
                grid,
                Sweep.from_config(config.dataset),
                out,
                seed=config.seed,
                jobs=jobs,
                k=config.mechanics.stiffness_k,
                alpha=config.mechanics.alpha,
                nodes=config.mechanics.field_nodes,
                preview=config.dataset.write_preview,
            )
        self.outputs.extend(out / entry.path for entry in manifest.entries)
        if config.dataset.write_preview:
            self.outputs.append(out / "preview.pgm")

        manifest = split(manifest, seed=config.seed)
        manifest.write(self.output(out, "manifest.json"))
        counts = {
            name: len(manifest.entries_of(name)) for name in ("train", "val", "test")
        }
        return (
            f"Generated {len(manifest.entries)} samples "
            f"(train {counts['train']}, val {counts['val']}, test {counts['test']}) "
            f"under {out}"
        )
