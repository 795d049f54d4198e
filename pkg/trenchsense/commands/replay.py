"""Replay a rendered pressing cycle through a checkpoint."""

from pathlib import Path

import numpy as np

from trenchsense.commands.base import BaseCommand, require_file
from trenchsense.core.config import RunConfig
from trenchsense.core.utils import Timeit
from trenchsense.evaluation.export import write_replay_csv
from trenchsense.evaluation.replay import make_replay_track, replay
from trenchsense.mechanics.types import MaterialParams
from trenchsense.neuralnet.checkpoint import load_checkpoint
from trenchsense.neuralnet.training import LABEL_SCALE
from trenchsense.optics.geometry import SensorGeometry
from trenchsense.optics.render import RenderConfig


class ReplayCommand(BaseCommand):
    """Replay a rendered pressing cycle through a checkpoint."""

    name = "replay"
    help = __doc__

    def add_arguments(self, parser):
        """Checkpoint and track flags."""
        parser.add_argument("--checkpoint", type=Path, help="checkpoint.tsck")
        parser.add_argument("--frames", type=int)
        parser.add_argument("--fps", type=float)

    def overrides(self, options):
        """Map flags onto the replay section."""
        return {
            "replay.frames": options.get("frames"),
            "replay.fps": options.get("fps"),
        }

    def handle(self, config: RunConfig, out: Path, **options) -> str:
        """Render the track, predict every frame and write the per-frame table."""
        checkpoint = require_file(options.get("checkpoint"), "checkpoint")
        network, metadata = load_checkpoint(checkpoint)
        section = config.replay
        with Timeit(self.stdout, "Rendering the replay track"):
            track = make_replay_track(
                SensorGeometry.from_config(config.geometry),
                MaterialParams.from_config(config.material),
                RenderConfig.from_config(config.render, seed=config.seed),
                point=(section.grid_x, section.grid_y),
                frames=section.frames,
                fps=section.fps,
                z_min=section.z_min,
                z_max=section.z_max,
                frequency=section.frequency,
                seed=config.seed,
                k=config.mechanics.stiffness_k,
                alpha=config.mechanics.alpha,
                nodes=config.mechanics.field_nodes,
            )
        result = replay(
            network,
            track,
            config.mechanics.stiffness_k,
            tuple(metadata.get("label_scale", LABEL_SCALE)),
        )
        write_replay_csv(result, self.output(out, "replay.csv"))
        mae = np.abs(result.residuals).mean(axis=0)
        return (
            f"Replayed {len(result.times)} frames at "
            f"{result.frames_per_second:.1f} predictions/s; MAE x {mae[0]:.4f}, "
            f"y {mae[1]:.4f}, z {mae[2]:.4f} mm"
        )
