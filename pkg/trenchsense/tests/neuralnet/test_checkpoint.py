"""
Test checkpoint files
"""

# pylint: disable=redefined-outer-name

import numpy as np
import pytest

from trenchsense.neuralnet.checkpoint import (
    FORMAT_VERSION,
    MAGIC,
    PREFIX,
    load_checkpoint,
    read_header,
    save_checkpoint,
)
from trenchsense.neuralnet.exceptions import CheckpointError
from trenchsense.neuralnet.network import Network
from trenchsense.neuralnet.specs import build_model


@pytest.fixture
def trained(tiny_spec):
    """A network whose running statistics moved away from their start."""
    network = Network(tiny_spec, seed=4)
    inputs = np.random.default_rng(0).uniform(size=(6, 8, 8, 25))
    network.forward(inputs)
    return network, inputs.astype(np.float32)


@pytest.fixture
def checkpoint(tmp_path, trained):
    """The trained network saved with some metadata."""
    network, _ = trained
    return save_checkpoint(
        network, tmp_path / "model" / "checkpoint.tsck", {"best_epoch": 3}
    )


def test_load_restores_predictions(trained, checkpoint, tiny_spec):
    """A loaded network predicts exactly like the saved one."""
    network, inputs = trained

    loaded, metadata = load_checkpoint(checkpoint, expected=tiny_spec)

    np.testing.assert_array_equal(loaded.predict(inputs), network.predict(inputs))
    assert loaded.training is False
    assert metadata["best_epoch"] == 3
    assert metadata["init_seed"] == 4
    assert metadata["batchnorm_momentum"] == 0.9


def test_header_describes_arrays(checkpoint, tiny_spec):
    """The header lists every stored array and hashes the spec."""
    header, blob = read_header(checkpoint)

    assert header["spec_hash"] == tiny_spec.spec_hash()
    assert header["arrays"][0] == {"name": "00.conv2d.weight", "shape": [3, 3, 25, 4]}
    assert len(blob) == 4 * tiny_spec.parameter_count(include_buffers=True)


def test_load_rejects_other_model(checkpoint):
    """A checkpoint only loads as the model it holds."""
    with pytest.raises(CheckpointError, match="cannot load it as CNN_1"):
        load_checkpoint(checkpoint, expected=build_model("CNN_1"))


@pytest.mark.parametrize(
    "mangle, message",
    [
        (lambda data: b"NOTACKPT" + data[8:], "is not a checkpoint"),
        (
            lambda data: PREFIX.pack(MAGIC, FORMAT_VERSION + 1, 0) + data[16:],
            "unsupported checkpoint version",
        ),
        (lambda data: data[:10], "shorter than the checkpoint prefix"),
        (lambda data: data[:40], "truncated inside its header"),
        (lambda data: data[:-4], "parameter bytes"),
    ],
)
def test_load_rejects_corrupt_files(checkpoint, mangle, message):
    """Corrupt or foreign files are checkpoint errors."""
    checkpoint.write_bytes(mangle(checkpoint.read_bytes()))

    with pytest.raises(CheckpointError, match=message):
        load_checkpoint(checkpoint)


def test_load_rejects_tampered_spec(checkpoint):
    """The stored spec must match its hash."""
    data = checkpoint.read_bytes()
    tampered = data.replace(b'"name": "tiny"', b'"name": "tinx"', 1)
    assert tampered != data
    checkpoint.write_bytes(tampered)

    with pytest.raises(CheckpointError, match="does not match its hash"):
        load_checkpoint(checkpoint)


def test_load_missing_checkpoint(tmp_path):
    """A missing file is a checkpoint error."""
    with pytest.raises(CheckpointError, match="Cannot read checkpoint"):
        load_checkpoint(tmp_path / "absent.tsck")
