"""
Test the training loop
"""

import csv
from unittest import mock

import numpy as np
import pytest

from trenchsense.core.exceptions import DataError, DomainError
from trenchsense.dataset.augment import AugmentSpec
from trenchsense.neuralnet.exceptions import TrainingDivergedError
from trenchsense.neuralnet.network import Network, mse_loss
from trenchsense.neuralnet.training import (
    HistoryRow,
    TrainConfig,
    denormalize_labels,
    normalize_labels,
    predict_channels,
    rescale,
    train,
    write_history,
)


@pytest.fixture
def sets(tiny_dataset):
    """Training and validation sets of tiny tiles."""
    return tiny_dataset(48, seed=0), tiny_dataset(16, seed=1)


def test_zero_epochs_records_initial_losses(tiny_spec, sets):
    """Without epochs the history holds the initialisation only."""
    network = Network(tiny_spec)

    result = train(network, *sets, TrainConfig(epochs=0))

    assert [row.epoch for row in result.history] == [0]
    assert result.best_epoch == 0
    assert result.best_val_loss == result.history[0].val_loss
    assert network.training is False


def test_training_lowers_validation_loss(tiny_spec, sets):
    """A few epochs of Adam beat the initial weights and keep the best state."""
    network = Network(tiny_spec)
    cfg = TrainConfig(learning_rate=1e-2, batch_size=8, epochs=12)

    result = train(network, *sets, cfg)

    assert len(result.history) == 13
    assert result.best_val_loss < result.history[0].val_loss
    assert result.best_epoch > 0
    assert result.best_val_loss == min(row.val_loss for row in result.history)
    channels, labels = sets[1]
    kept = mse_loss(predict_channels(network, channels), normalize_labels(labels))
    assert kept == pytest.approx(result.best_val_loss, rel=1e-5)


def test_training_is_reproducible(tiny_spec, sets):
    """The same seed replays the same run, augmentation included."""
    cfg = TrainConfig(optimizer="sgd-momentum", learning_rate=1e-2, epochs=2, seed=5)
    augment = AugmentSpec(probability=1.0)

    first = train(Network(tiny_spec), *sets, cfg, augment)
    again = train(Network(tiny_spec), *sets, cfg, augment)

    assert first.history == again.history


def test_training_reports_divergence(tiny_spec, sets):
    """A non-finite loss stops the run."""
    network = Network(tiny_spec)

    def broken_forward(batch):
        return np.full((len(batch), 3), np.nan, dtype=np.float32)

    with (
        mock.patch.object(network, "forward", side_effect=broken_forward),
        pytest.raises(TrainingDivergedError, match="validation loss became nan"),
    ):
        train(network, *sets, TrainConfig(epochs=1))


def test_training_rejects_bad_sets(tiny_spec, tiny_dataset):
    """Empty sets and mismatched labels are data errors."""
    channels, labels = tiny_dataset(4)
    network = Network(tiny_spec)

    with pytest.raises(DataError, match="the val set is empty"):
        train(network, (channels, labels), (channels[:0], labels[:0]), TrainConfig())
    with pytest.raises(DataError, match="holds 4 samples but 3 labels"):
        train(network, (channels, labels[:3]), (channels, labels), TrainConfig())


@pytest.mark.parametrize(
    "overrides, message",
    [
        ({"optimizer": "rmsprop"}, "Optimizer 'rmsprop' not found"),
        ({"batch_size": 0}, "batch_size must be at least 1"),
        ({"epochs": -1}, "epochs must be non-negative"),
        ({"learning_rate": -1e-3}, "learning_rate must be non-negative"),
        ({"label_scale": (16.0, 0.0, 1.5)}, "label_scale must hold"),
    ],
)
def test_train_config_validation(overrides, message):
    """Invalid settings are rejected."""
    with pytest.raises(DomainError, match=message):
        TrainConfig(**overrides)


def test_label_normalisation():
    """Labels map to unit scale and back."""
    labels = np.array([[8.0, 4.0, 0.75]])

    normalised = normalize_labels(labels)

    np.testing.assert_allclose(normalised, [[0.5, 0.25, 0.5]])
    np.testing.assert_allclose(denormalize_labels(normalised), labels)


def test_rescale_moves_channels_last():
    """Byte tiles become channels-last floats in [0, 1]."""
    channels = np.zeros((2, 25, 8, 8), dtype=np.uint8)
    channels[:, 3] = 255

    out = rescale(channels)

    assert out.shape == (2, 8, 8, 25)
    assert out.dtype == np.float32
    assert (out[..., 3] == 1.0).all()
    assert out[..., 2].max() == 0.0


def test_write_history(tmp_path):
    """One CSV row per epoch."""
    history = [HistoryRow(0, 0.5, 0.6, 1e-3), HistoryRow(1, 0.25, 0.3, 1e-3)]

    path = write_history(history, tmp_path / "history.csv")

    with path.open(encoding="utf-8") as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == ["epoch", "train_loss", "val_loss", "lr"]
    assert rows[2] == ["1", "0.25", "0.3", "0.001"]
