"""Test-set evaluation of trained networks."""

from dataclasses import dataclass
from typing import Dict, Sequence

import numpy as np

from trenchsense.core.exceptions import DomainError
from trenchsense.evaluation.metrics import (
    AXES,
    AxisMetrics,
    compute_metrics,
    residual_stats,
)
from trenchsense.neuralnet.network import Network
from trenchsense.neuralnet.training import (
    LABEL_SCALE,
    denormalize_labels,
    normalize_labels,
    predict_channels,
)


@dataclass(frozen=True, eq=False)
class Evaluation:
    """Predictions of a network on a labelled set, in mm and normalised units."""

    predictions: np.ndarray
    truths: np.ndarray
    metrics: Dict[str, AxisMetrics]
    metrics_normalized: Dict[str, AxisMetrics]


def evaluate(
    network: Network,
    channels: np.ndarray,
    labels: np.ndarray,
    label_scale=LABEL_SCALE,
    batch_size: int = 64,
) -> Evaluation:
    """Predict a set of byte samples and score them in both scales."""
    normalized = predict_channels(network, channels, batch_size)
    predictions = denormalize_labels(normalized, label_scale)
    truths = np.asarray(labels, dtype=np.float64)
    return Evaluation(
        predictions=predictions,
        truths=truths,
        metrics=compute_metrics(predictions, truths),
        metrics_normalized=compute_metrics(
            normalized, normalize_labels(truths, label_scale)
        ),
    )


@dataclass(frozen=True)
class ModelComparison:
    """Per-axis MSE and residual IQR of one model on a shared set, in mm."""

    name: str
    mse: Dict[str, float]
    iqr: Dict[str, float]


def compare_models(
    networks: Dict[str, Network],
    channels: np.ndarray,
    labels: np.ndarray,
    label_scale=LABEL_SCALE,
) -> Dict[str, ModelComparison]:
    """Score several networks on the same samples."""
    comparisons = {}
    for name, network in networks.items():
        result = evaluate(network, channels, labels, label_scale)
        spread = residual_stats(result.predictions, result.truths)
        comparisons[name] = ModelComparison(
            name=name,
            mse={axis: value.mse for axis, value in result.metrics.items()},
            iqr={axis: value.iqr for axis, value in spread.items()},
        )
    return comparisons


def mean_comparison(runs: Sequence[ModelComparison]) -> ModelComparison:
    """Average the per-axis MSE and IQR of several runs of one model.

    Raises:
        DomainError: when there is no run or the runs name different models.
    """
    if not runs:
        raise DomainError("at least one run is needed to average")
    names = {run.name for run in runs}
    if len(names) != 1:
        raise DomainError(f"runs of different models cannot be averaged: {names}")
    return ModelComparison(
        name=runs[0].name,
        mse={axis: float(np.mean([run.mse[axis] for run in runs])) for axis in AXES},
        iqr={axis: float(np.mean([run.iqr[axis] for run in runs])) for axis in AXES},
    )
