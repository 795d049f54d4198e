"""Training loop, input rescaling and label normalisation."""

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from trenchsense.core.exceptions import DataError, DomainError
from trenchsense.core.utils import child_rng
from trenchsense.dataset.augment import AugmentSpec, augment_channels
from trenchsense.dataset.samples import MAX_TRAINING_Z
from trenchsense.neuralnet.exceptions import TrainingDivergedError
from trenchsense.neuralnet.network import Network, mse_loss
from trenchsense.neuralnet.optim import OPTIMIZERS, get_optimizer

logger = logging.getLogger(__name__)

# x and y over the window size, z over the training range
LABEL_SCALE = (16.0, 16.0, MAX_TRAINING_Z)
PIXEL_SCALE = np.float32(255.0)

SplitArrays = Tuple[np.ndarray, np.ndarray]


@dataclass(frozen=True)
class TrainConfig:
    """Optimisation settings of one training run."""

    optimizer: str = "adam"
    learning_rate: float = 1e-3
    momentum: float = 0.9
    batch_size: int = 32
    epochs: int = 50
    seed: int = 0
    label_scale: Tuple[float, float, float] = LABEL_SCALE

    def __post_init__(self):
        """Validate the settings."""
        if self.optimizer not in OPTIMIZERS:
            raise DomainError(
                f"Optimizer '{self.optimizer}' not found. "
                f"Available optimizers: {list(OPTIMIZERS)}"
            )
        if self.batch_size < 1:
            raise DomainError("batch_size must be at least 1")
        if self.epochs < 0:
            raise DomainError("epochs must be non-negative")
        if self.learning_rate < 0:
            raise DomainError("learning_rate must be non-negative")
        if len(self.label_scale) != 3 or not all(
            value > 0 and math.isfinite(value) for value in self.label_scale
        ):
            raise DomainError("label_scale must hold three positive finite values")

    @classmethod
    def from_config(cls, section, seed: int, window: float = 16.0) -> "TrainConfig":
        """Build from the ``train`` section of a run configuration."""
        return cls(
            optimizer=section.optimizer,
            learning_rate=section.learning_rate,
            momentum=section.momentum,
            batch_size=section.batch_size,
            epochs=section.epochs,
            seed=seed,
            label_scale=(window, window, MAX_TRAINING_Z),
        )


@dataclass(frozen=True)
class HistoryRow:
    """Losses at the end of one epoch; epoch 0 is the initialisation."""

    epoch: int
    train_loss: float
    val_loss: float
    learning_rate: float


@dataclass
class TrainingResult:
    """Outcome of a training run; ``network`` holds the best validation state."""

    network: Network
    history: List[HistoryRow] = field(default_factory=list)
    best_epoch: int = 0
    best_val_loss: float = math.inf


def rescale(channels: np.ndarray) -> np.ndarray:
    """Map (..., 25, H, W) bytes to (..., H, W, 25) floats in [0, 1]."""
    moved = np.moveaxis(np.asarray(channels), -3, -1)
    return moved.astype(np.float32) / PIXEL_SCALE


def normalize_labels(labels: np.ndarray, scale=LABEL_SCALE) -> np.ndarray:
    """Millimetre labels to unit-scale training targets."""
    return (np.asarray(labels, dtype=np.float64) / np.asarray(scale)).astype(
        np.float32
    )


def denormalize_labels(values: np.ndarray, scale=LABEL_SCALE) -> np.ndarray:
    """Unit-scale predictions back to millimetres."""
    return np.asarray(values, dtype=np.float64) * np.asarray(scale)


def predict_channels(
    network: Network, channels: np.ndarray, batch_size: int = 64
) -> np.ndarray:
    """Eval-mode normalised predictions for a stack of byte samples."""
    chunks = [
        network.predict(rescale(channels[start : start + batch_size]), batch_size)
        for start in range(0, len(channels), batch_size)
    ]
    if not chunks:
        return np.zeros((0, 3), dtype=np.float32)
    return np.concatenate(chunks)


def _split_loss(network: Network, data: SplitArrays, cfg: TrainConfig) -> float:
    channels, labels = data
    predictions = predict_channels(network, channels, cfg.batch_size)
    return mse_loss(predictions, normalize_labels(labels, cfg.label_scale))


def train(
    network: Network,
    train_set: SplitArrays,
    val_set: SplitArrays,
    cfg: TrainConfig,
    augment: Optional[AugmentSpec] = None,
) -> TrainingResult:
    """Minimise the MSE of normalised labels and keep the best validation state.

    Both sets are (channels (N, 25, H, W) bytes, labels (N, 3) mm) pairs.
    Shuffling and augmentation draw from generators derived from
    ``cfg.seed``; the reported train loss is the eval-mode loss over the
    whole, unaugmented, training set.

    Raises:
        DataError: when a set is empty or labels and channels disagree.
        TrainingDivergedError: when a batch loss stops being finite.
    """
    for name, (channels, labels) in (("train", train_set), ("val", val_set)):
        if len(channels) == 0:
            raise DataError(f"the {name} set is empty")
        if len(channels) != len(labels):
            raise DataError(
                f"the {name} set holds {len(channels)} samples "
                f"but {len(labels)} labels"
            )

    optimizer = get_optimizer(cfg.optimizer, cfg.learning_rate, cfg.momentum)
    shuffle_rng = child_rng(cfg.seed, 0)
    augment_rng = child_rng(cfg.seed, 1)
    channels, labels = train_set
    targets = normalize_labels(labels, cfg.label_scale)

    def record(epoch: int) -> HistoryRow:
        row = HistoryRow(
            epoch,
            _split_loss(network, train_set, cfg),
            _split_loss(network, val_set, cfg),
            cfg.learning_rate,
        )
        if not math.isfinite(row.val_loss):
            raise TrainingDivergedError(
                f"validation loss became {row.val_loss} at epoch {epoch} "
                f"(learning_rate={cfg.learning_rate})"
            )
        return row

    result = TrainingResult(network=network)
    row = record(0)
    result.history.append(row)
    result.best_val_loss = row.val_loss
    best_state = network.state()
    logger.info("Epoch 0: train %.6f, val %.6f", row.train_loss, row.val_loss)

    for epoch in range(1, cfg.epochs + 1):
        order = shuffle_rng.permutation(len(channels))
        network.train_mode()
        for batch_index, start in enumerate(range(0, len(order), cfg.batch_size)):
            index = order[start : start + cfg.batch_size]
            batch = channels[index]
            if augment is not None:
                batch = np.stack(
                    [augment_channels(tiles, augment, augment_rng) for tiles in batch]
                )
            predictions = network.forward(rescale(batch))
            loss = mse_loss(predictions, targets[index])
            if not math.isfinite(loss):
                raise TrainingDivergedError(
                    f"training loss became {loss} at epoch {epoch}, batch "
                    f"{batch_index} (learning_rate={cfg.learning_rate}, "
                    f"batch_size={cfg.batch_size})"
                )
            network.backward(targets[index])
            optimizer.step(dict(network.parameters()), network.gradients())

        row = record(epoch)
        result.history.append(row)
        if row.val_loss < result.best_val_loss:
            result.best_val_loss = row.val_loss
            result.best_epoch = epoch
            best_state = network.state()
        logger.info(
            "Epoch %s/%s: train %.6f, val %.6f",
            epoch,
            cfg.epochs,
            row.train_loss,
            row.val_loss,
        )

    network.load_state(best_state)
    network.eval_mode()
    logger.info(
        "Kept epoch %s with validation loss %.6f",
        result.best_epoch,
        result.best_val_loss,
    )
    return result


def write_history(history: List[HistoryRow], path: Path) -> Path:
    """Write the per-epoch losses as CSV (epoch, train_loss, val_loss, lr)."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(["epoch", "train_loss", "val_loss", "lr"])
            for row in history:
                writer.writerow(
                    [
                        row.epoch,
                        repr(float(row.train_loss)),
                        repr(float(row.val_loss)),
                        repr(float(row.learning_rate)),
                    ]
                )
    except OSError as e:
        raise DataError(f"Cannot write {path}: {e}") from e
    return path
