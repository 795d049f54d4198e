"""Train several CNN_n models over seeds and compare them on the test split."""

from pathlib import Path

from trenchsense.commands.base import BaseCommand, require_file
from trenchsense.commands.train import (
    add_training_arguments,
    train_model,
    training_overrides,
)
from trenchsense.core.config import RunConfig
from trenchsense.core.utils import Timeit
from trenchsense.dataset.manifest import DatasetManifest, load_split
from trenchsense.evaluation.export import write_comparison_csv
from trenchsense.evaluation.models import compare_models, mean_comparison
from trenchsense.neuralnet.specs import MODEL_REGISTRY, build_model

DEFAULT_SEEDS = (1, 2, 3)


class CompareCommand(BaseCommand):
    """Train several CNN_n models over seeds and compare them on the test split."""

    name = "compare"
    help = __doc__

    def add_arguments(self, parser):
        """Dataset, model and seed flags."""
        add_training_arguments(parser)
        parser.add_argument(
            "--models",
            nargs="+",
            default=list(MODEL_REGISTRY),
            help="Models to train (all of the family by default)",
        )
        parser.add_argument(
            "--seeds",
            nargs="+",
            type=int,
            default=list(DEFAULT_SEEDS),
            help="Initialisation and shuffling seeds",
        )

    def overrides(self, options):
        """Map flags onto the train and augment sections."""
        return training_overrides(options)

    def handle(self, config: RunConfig, out: Path, **options) -> str:
        """Write the per-seed and mean MSE and IQR of every model."""
        manifest_path = require_file(options.get("dataset"), "dataset manifest")
        models = options.get("models") or list(MODEL_REGISTRY)
        seeds = options.get("seeds") or list(DEFAULT_SEEDS)
        for name in models:
            build_model(name)
        manifest = DatasetManifest.read(manifest_path)
        root = manifest_path.parent
        train_set = load_split(manifest, root, "train")
        val_set = load_split(manifest, root, "val")
        channels, labels = load_split(manifest, root, "test")

        runs = {name: [] for name in models}
        for seed in seeds:
            networks = {}
            for name in models:
                with Timeit(self.stdout, f"Training {name} with seed {seed}"):
                    result, cfg = train_model(config, name, seed, train_set, val_set)
                networks[name] = result.network
            comparisons = compare_models(networks, channels, labels, cfg.label_scale)
            for name in models:
                runs[name].append(comparisons[name])

        means = {name: mean_comparison(runs[name]) for name in models}
        rows = []
        for name in models:
            rows += [
                (str(seed), run) for seed, run in zip(seeds, runs[name], strict=True)
            ]
            rows.append(("mean", means[name]))
        write_comparison_csv(rows, self.output(out, "comparison.csv"))
        return "; ".join(
            f"{name} MSE x {means[name].mse['x']:.5f}, y {means[name].mse['y']:.5f}, "
            f"z {means[name].mse['z']:.5f} mm²"
            for name in models
        )
