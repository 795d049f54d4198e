"""
Test regression metrics and residual statistics
"""

import math

import numpy as np
import pytest

from trenchsense.core.exceptions import DomainError
from trenchsense.evaluation.metrics import compute_metrics, residual_stats


@pytest.fixture
def pairs():
    """Noisy predictions of (x, y, z) labels."""
    rng = np.random.default_rng(0)
    truths = rng.uniform(0.0, 10.0, size=(200, 3))
    predictions = truths + rng.normal(0.0, 0.1, size=truths.shape)
    return predictions, truths


def test_metrics_relations(pairs):
    """RMSE is the root of MSE and bounds MAE from above."""
    metrics = compute_metrics(*pairs)

    assert list(metrics) == ["x", "y", "z"]
    for value in metrics.values():
        assert value.rmse == pytest.approx(math.sqrt(value.mse))
        assert value.mae <= value.rmse
        assert 0.99 < value.r_squared < 1.0
        assert value.r_squared_defined


def test_metrics_of_perfect_predictions(pairs):
    """Exact predictions score zero error and R² of one."""
    _, truths = pairs

    metrics = compute_metrics(truths, truths)

    assert metrics["z"].mse == 0.0
    assert metrics["z"].r_squared == 1.0


def test_metrics_known_values():
    """MSE, MAE and R² of a small hand-checked case."""
    metrics = compute_metrics(np.array([1.0, 2.0, 4.0]), np.array([1.0, 3.0, 5.0]))

    value = metrics["x"]
    assert value.mse == pytest.approx(2 / 3)
    assert value.mae == pytest.approx(2 / 3)
    # SS_tot = 8 around the mean truth of 3
    assert value.r_squared == pytest.approx(1 - 2 / 8)


def test_r_squared_undefined_for_constant_truths():
    """Constant truths leave R² undefined."""
    metrics = compute_metrics(np.array([1.0, 1.2]), np.array([1.0, 1.0]))

    assert math.isnan(metrics["x"].r_squared)
    assert metrics["x"].r_squared_defined is False
    assert metrics["x"].mse == pytest.approx(0.02)


@pytest.mark.parametrize(
    "predictions, truths, message",
    [
        (np.zeros((3, 3)), np.zeros((2, 3)), "differ"),
        (np.zeros((0, 3)), np.zeros((0, 3)), "at least one sample"),
        (np.zeros((3, 4)), np.zeros((3, 4)), "expected"),
    ],
)
def test_metrics_reject_bad_arrays(predictions, truths, message):
    """Arrays must match and hold samples."""
    with pytest.raises(DomainError, match=message):
        compute_metrics(predictions, truths)


def test_residual_stats_of_symmetric_residuals():
    """Residuals ±c have a zero median and fall inside a wider band."""
    truths = np.zeros(100)
    predictions = np.repeat([-0.05, 0.05], 50)

    stats = residual_stats(predictions, truths)["x"]

    assert stats.median == pytest.approx(0.0)
    assert stats.q1 == pytest.approx(-0.05)
    assert stats.q3 == pytest.approx(0.05)
    assert stats.iqr == pytest.approx(0.1)
    assert stats.within_band == 1.0
    assert sum(stats.counts) == 100
    assert stats.outside == 0
    assert len(stats.counts) == 41
    assert len(stats.edges) == 42
    assert stats.edges[0] == pytest.approx(-0.25)


def test_residual_stats_counts_outliers():
    """Residuals beyond the histogram range are counted apart."""
    predictions = np.array([0.0, 0.2, 0.3, -0.5])

    stats = residual_stats(predictions, np.zeros(4), band=0.1)["x"]

    assert stats.outside == 2
    assert sum(stats.counts) == 2
    assert stats.within_band == 0.25


def test_residual_stats_validation():
    """Histogram settings must be positive."""
    with pytest.raises(DomainError, match="must be positive"):
        residual_stats(np.zeros(3), np.zeros(3), bins=0)
