"""
Test the evaluation of trained networks
"""

import pytest

from trenchsense.core.exceptions import DomainError
from trenchsense.evaluation.models import (
    ModelComparison,
    compare_models,
    evaluate,
    mean_comparison,
)
from trenchsense.neuralnet.network import Network
from trenchsense.neuralnet.training import LABEL_SCALE


def test_evaluate_scores_both_scales(tiny_spec, tiny_dataset):
    """Millimetre errors are normalised errors times the squared scale."""
    channels, labels = tiny_dataset(20)

    result = evaluate(Network(tiny_spec), channels, labels)

    assert result.predictions.shape == labels.shape
    assert list(result.metrics) == ["x", "y", "z"]
    for axis, scale in zip("xyz", LABEL_SCALE, strict=True):
        assert result.metrics[axis].mse == pytest.approx(
            result.metrics_normalized[axis].mse * scale**2, rel=1e-4
        )


def test_compare_models(tiny_spec, tiny_dataset):
    """Every network is scored on the same samples."""
    channels, labels = tiny_dataset(20)
    networks = {"first": Network(tiny_spec), "second": Network(tiny_spec, seed=1)}

    comparisons = compare_models(networks, channels, labels)

    assert list(comparisons) == ["first", "second"]
    first = comparisons["first"]
    assert first.name == "first"
    assert set(first.mse) == set(first.iqr) == {"x", "y", "z"}
    expected = evaluate(networks["first"], channels, labels).metrics["z"].mse
    assert first.mse["z"] == pytest.approx(expected)
    assert comparisons["second"].mse != first.mse


def _run(name, mse, iqr):
    return ModelComparison(
        name=name,
        mse={"x": mse, "y": 2 * mse, "z": 3 * mse},
        iqr={"x": iqr, "y": iqr, "z": iqr},
    )


def test_mean_comparison():
    """Seeds are averaged axis by axis."""
    mean = mean_comparison([_run("CNN_3", 0.1, 0.2), _run("CNN_3", 0.3, 0.4)])

    assert mean.name == "CNN_3"
    assert mean.mse == pytest.approx({"x": 0.2, "y": 0.4, "z": 0.6})
    assert mean.iqr == pytest.approx({"x": 0.3, "y": 0.3, "z": 0.3})


@pytest.mark.parametrize(
    "runs, message",
    [
        ([], "at least one run"),
        ([_run("CNN_1", 0.1, 0.1), _run("CNN_3", 0.1, 0.1)], "different models"),
    ],
)
def test_mean_comparison_rejects(runs, message):
    """Averaging needs runs of a single model."""
    with pytest.raises(DomainError, match=message):
        mean_comparison(runs)
