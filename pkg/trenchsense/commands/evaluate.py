"""Score a checkpoint on a dataset split."""

from pathlib import Path

from trenchsense.commands.base import BaseCommand, require_file
from trenchsense.core.config import RunConfig
from trenchsense.dataset.manifest import DatasetManifest, load_split
from trenchsense.evaluation.ellipse import error_ellipse
from trenchsense.evaluation.export import (
    write_ellipse_json,
    write_metrics_csv,
    write_residuals_json,
)
from trenchsense.evaluation.metrics import residual_stats
from trenchsense.evaluation.models import evaluate
from trenchsense.neuralnet.checkpoint import load_checkpoint
from trenchsense.neuralnet.training import LABEL_SCALE


class EvalCommand(BaseCommand):
    """Score a checkpoint on a dataset split."""

    name = "eval"
    help = __doc__

    def add_arguments(self, parser):
        """Input flags."""
        parser.add_argument("--checkpoint", type=Path, help="checkpoint.tsck")
        parser.add_argument("--dataset", type=Path, help="manifest.json")
        parser.add_argument(
            "--split", default="test", choices=("train", "val", "test")
        )

    def handle(self, config: RunConfig, out: Path, **options) -> str:
        """Write metrics in both scales, residual statistics and the ellipse."""
        checkpoint = require_file(options.get("checkpoint"), "checkpoint")
        manifest_path = require_file(options.get("dataset"), "dataset manifest")
        network, metadata = load_checkpoint(checkpoint)
        label_scale = tuple(metadata.get("label_scale", LABEL_SCALE))
        manifest = DatasetManifest.read(manifest_path)
        channels, labels = load_split(
            manifest, manifest_path.parent, options.get("split", "test")
        )

        result = evaluate(network, channels, labels, label_scale)
        section = config.eval
        stats = residual_stats(
            result.predictions,
            result.truths,
            section.histogram_bins,
            section.histogram_range,
            section.band,
        )
        ellipse = error_ellipse(
            result.predictions[:, :2] - result.truths[:, :2], section.coverage
        )

        write_metrics_csv(result.metrics, self.output(out, "metrics.csv"))
        write_metrics_csv(
            result.metrics_normalized, self.output(out, "metrics_normalized.csv")
        )
        write_residuals_json(stats, self.output(out, "residuals.json"))
        write_ellipse_json(ellipse, self.output(out, "ellipse.json"))
        metrics = result.metrics
        return (
            f"{network.spec.name} on {len(labels)} samples: MAE x "
            f"{metrics['x'].mae:.4f}, y {metrics['y'].mae:.4f}, z "
            f"{metrics['z'].mae:.4f} mm; R² x {metrics['x'].r_squared:.4f}, "
            f"y {metrics['y'].r_squared:.4f}, z {metrics['z'].r_squared:.4f}"
        )
