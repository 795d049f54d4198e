"""
Fixtures shared by the trenchsense test suite
"""

# pylint: disable=redefined-outer-name

import logging
from dataclasses import replace

import numpy as np
import pytest

from trenchsense.core.config import get_settings
from trenchsense.mechanics.types import MaterialParams
from trenchsense.neuralnet.specs import (
    BatchNormSpec,
    Conv2DSpec,
    FlattenSpec,
    MaxPoolSpec,
    ModelSpec,
    ReLUSpec,
)
from trenchsense.optics.geometry import SensorGeometry
from trenchsense.optics.render import RenderConfig


@pytest.fixture(autouse=True)
def isolated_settings(monkeypatch, tmp_path):
    """Point the output root at a temporary directory and reset cached settings."""
    monkeypatch.setenv("TRENCHSENSE_OUTPUT_ROOT", str(tmp_path / "runs"))
    monkeypatch.delenv("TRENCHSENSE_SENTRY_DSN", raising=False)
    monkeypatch.delenv("TRENCHSENSE_SENTRY_IS_ENABLED", raising=False)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()
    # configure_logging turns propagation off for the package logger
    package_logger = logging.getLogger("trenchsense")
    package_logger.propagate = True
    package_logger.handlers.clear()
    root = logging.getLogger()
    for handler in list(root.handlers):
        if type(handler) is logging.StreamHandler:
            root.removeHandler(handler)


@pytest.fixture
def geometry():
    """Default 5×5 cross layout."""
    return SensorGeometry()


@pytest.fixture
def material():
    """Default film material."""
    return MaterialParams()


@pytest.fixture
def render_config():
    """Default camera model."""
    return RenderConfig()


@pytest.fixture
def quiet_render_config(render_config):
    """Default camera model without noise."""
    return replace(render_config, noise_sigma=0.0)


@pytest.fixture
def tiny_spec():
    """A small model over 8×8 tiles of 25 channels."""
    return ModelSpec(
        name="tiny",
        input_shape=(8, 8, 25),
        layers=[
            Conv2DSpec(out_channels=4, kernel=3),
            BatchNormSpec(channels=4),
            ReLUSpec(),
            MaxPoolSpec(size=2),
            FlattenSpec(),
        ],
    )


@pytest.fixture
def tiny_dataset():
    """Byte samples of shape (N, 25, 8, 8) whose labels depend on the pixels."""

    def build(count: int, seed: int = 0):
        rng = np.random.default_rng(seed)
        labels = np.column_stack(
            [
                rng.uniform(4.0, 12.0, count),
                rng.uniform(4.0, 12.0, count),
                rng.uniform(0.1, 1.5, count),
            ]
        )
        channels = rng.integers(0, 40, size=(count, 25, 8, 8))
        # Brightness of the first tile encodes z, the next two encode x and y
        channels[:, 0] += (labels[:, 2] / 1.5 * 200).astype(int)[:, None, None]
        channels[:, 1] += (labels[:, 0] / 16 * 200).astype(int)[:, None, None]
        channels[:, 2] += (labels[:, 1] / 16 * 200).astype(int)[:, None, None]
        return np.clip(channels, 0, 255).astype(np.uint8), labels

    return build
