"""
Test model specifications and the CNN_n family
"""

import pytest
from pydantic import ValidationError

from trenchsense.core.exceptions import DomainError
from trenchsense.neuralnet.network import Network
from trenchsense.neuralnet.specs import (
    MODEL_REGISTRY,
    Conv2DSpec,
    DenseSpec,
    FlattenSpec,
    MaxPoolSpec,
    ModelSpec,
    build_model,
)


@pytest.mark.parametrize(
    "name, count",
    [
        ("CNN_1", 94_147),
        ("CNN_3", 203_587),
        ("CNN_5", 439_651),
        ("CNN_7", 735_331),
    ],
)
def test_parameter_counts(name, count):
    """Trainable parameter counts of the model family."""
    assert build_model(name).parameter_count() == count


def test_parameter_count_with_running_statistics():
    """Running statistics add two values per batch-norm channel."""
    spec = build_model("CNN_1")

    assert spec.parameter_count(include_buffers=True) == 94_147 + 2 * 64


def test_instantiated_network_matches_spec_count():
    """The instantiated network holds exactly the counted parameters."""
    network = Network(build_model("CNN_1"))

    assert network.parameter_count() == 94_147
    assert network.parameter_count(include_buffers=True) == 94_275


def test_conv_output_shapes():
    """Shape inference follows valid and same padding through the pools."""
    assert build_model("CNN_1").conv_output_shapes() == [(54, 54, 64)]
    assert build_model("CNN_3").conv_output_shapes() == [
        (54, 54, 64),
        (25, 25, 64),
        (12, 12, 128),
    ]
    assert build_model("CNN_7").shapes()[-1] == (3,)


def test_registry_lists_the_family():
    """Four depths are available."""
    assert list(MODEL_REGISTRY) == ["CNN_1", "CNN_3", "CNN_5", "CNN_7"]


def test_unknown_model():
    """Unknown names list the available models."""
    with pytest.raises(DomainError, match=r"Model 'CNN_2' not found\. Available"):
        build_model("CNN_2")


@pytest.mark.parametrize(
    "layers, message",
    [
        ([Conv2DSpec(out_channels=2, kernel=4), FlattenSpec()], "kernel must be odd"),
        ([Conv2DSpec(out_channels=2, kernel=9), FlattenSpec()], "exceeds input"),
        ([MaxPoolSpec(size=2)], "dense expects a flat input"),
        ([FlattenSpec(), MaxPoolSpec(size=2)], "cannot pool"),
    ],
)
def test_spec_rejects_inconsistent_shapes(layers, message):
    """Static shape inference runs when a spec is built."""
    with pytest.raises(ValidationError, match=message):
        ModelSpec(name="broken", input_shape=(8, 8, 1), layers=layers)


def test_spec_requires_three_outputs():
    """The head predicts (x, y, z)."""
    with pytest.raises(ValidationError, match="the head must output 3 values"):
        ModelSpec(
            name="broken",
            input_shape=(4, 4, 1),
            layers=[FlattenSpec()],
            head=DenseSpec(out_features=2),
        )


def test_spec_from_json_keeps_hash(tiny_spec):
    """A spec rebuilt from its JSON form is the same model."""
    rebuilt = ModelSpec.model_validate(tiny_spec.model_dump(mode="json"))

    assert rebuilt == tiny_spec
    assert rebuilt.spec_hash() == tiny_spec.spec_hash()
    assert build_model("CNN_1").spec_hash() != build_model("CNN_3").spec_hash()


def test_spec_rejects_unknown_layer_kind():
    """Layer kinds are a closed set."""
    with pytest.raises(ValidationError):
        ModelSpec.model_validate(
            {"name": "odd", "input_shape": [4, 4, 1], "layers": [{"kind": "lstm"}]}
        )
