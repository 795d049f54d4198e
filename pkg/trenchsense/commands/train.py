"""Train a CNN_n model on a generated dataset."""

from pathlib import Path
from typing import Tuple

import numpy as np

from trenchsense.commands.base import BaseCommand, require_file
from trenchsense.core.config import RunConfig
from trenchsense.core.utils import Timeit
from trenchsense.dataset.augment import AugmentSpec
from trenchsense.dataset.manifest import DatasetManifest, load_split
from trenchsense.neuralnet.checkpoint import save_checkpoint
from trenchsense.neuralnet.network import Network
from trenchsense.neuralnet.specs import build_model
from trenchsense.neuralnet.training import (
    TrainConfig,
    TrainingResult,
    train,
    write_history,
)

Split = Tuple[np.ndarray, np.ndarray]


def add_training_arguments(parser):
    """Optimisation flags shared by the commands that train networks."""
    parser.add_argument(
        "--dataset", type=Path, help="manifest.json written by the dataset command"
    )
    parser.add_argument("--epochs", type=int)
    parser.add_argument("--batch-size", type=int)
    parser.add_argument("--lr", type=float, help="Learning rate")
    parser.add_argument("--optimizer", choices=("adam", "sgd-momentum"))
    parser.add_argument(
        "--no-augment", action="store_true", help="Disable camera jitter"
    )


def training_overrides(options):
    """Map the optimisation flags onto the train and augment sections."""
    return {
        "train.epochs": options.get("epochs"),
        "train.batch_size": options.get("batch_size"),
        "train.learning_rate": options.get("lr"),
        "train.optimizer": options.get("optimizer"),
        "augment.enabled": False if options.get("no_augment") else None,
    }


def train_model(
    config: RunConfig, name: str, seed: int, train_set: Split, val_set: Split
) -> Tuple[TrainingResult, TrainConfig]:
    """Initialise a model of the family with ``seed`` and train it."""
    network = Network(build_model(name), seed=seed)
    cfg = TrainConfig.from_config(
        config.train, seed=seed, window=config.geometry.window
    )
    augment = (
        AugmentSpec.from_config(config.augment, seed=seed)
        if config.augment.enabled
        else None
    )
    return train(network, train_set, val_set, cfg, augment), cfg


class TrainCommand(BaseCommand):
    """Train a CNN_n model on a generated dataset."""

    name = "train"
    help = __doc__

    def add_arguments(self, parser):
        """Dataset and optimisation flags."""
        add_training_arguments(parser)
        parser.add_argument("--model", help="CNN_1, CNN_3, CNN_5 or CNN_7")

    def overrides(self, options):
        """Map flags onto the train and augment sections."""
        return {"train.model": options.get("model"), **training_overrides(options)}

    def handle(self, config: RunConfig, out: Path, **options) -> str:
        """Train, then save the best checkpoint and the loss history."""
        manifest_path = require_file(options.get("dataset"), "dataset manifest")
        manifest = DatasetManifest.read(manifest_path)
        root = manifest_path.parent
        train_set = load_split(manifest, root, "train")
        val_set = load_split(manifest, root, "val")

        spec = build_model(config.train.model)
        with Timeit(self.stdout, f"Training {spec.name}"):
            result, cfg = train_model(
                config, spec.name, config.seed, train_set, val_set
            )

        save_checkpoint(
            result.network,
            self.output(out, "checkpoint.tsck"),
            metadata={
                "label_scale": list(cfg.label_scale),
                "best_epoch": result.best_epoch,
                "best_val_loss": result.best_val_loss,
                "optimizer": cfg.optimizer,
                "learning_rate": cfg.learning_rate,
                "batch_size": cfg.batch_size,
                "epochs": cfg.epochs,
                "seed": cfg.seed,
                "dataset_hash": manifest.generator_config_hash,
            },
        )
        write_history(result.history, self.output(out, "history.csv"))
        return (
            f"{spec.name} ({spec.parameter_count()} parameters): best epoch "
            f"{result.best_epoch}, validation loss {result.best_val_loss:.6f}"
        )
