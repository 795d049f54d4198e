"""Regression metrics and residual analysis."""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from trenchsense.core.exceptions import DomainError

logger = logging.getLogger(__name__)

AXES = ("x", "y", "z")


@dataclass(frozen=True)
class AxisMetrics:
    """Errors of one predicted coordinate.

    ``r_squared`` is NaN and ``r_squared_defined`` False when the truths do
    not vary.
    """

    mse: float
    rmse: float
    mae: float
    r_squared: float
    r_squared_defined: bool = True


@dataclass(frozen=True)
class ResidualStats:
    """Distribution of the residuals (predicted - true) of one coordinate."""

    counts: Tuple[int, ...]
    edges: Tuple[float, ...]
    outside: int
    median: float
    q1: float
    q3: float
    iqr: float
    within_band: float
    band: float


def _columns(predictions, truths) -> Tuple[np.ndarray, np.ndarray]:
    predictions = np.asarray(predictions, dtype=np.float64)
    truths = np.asarray(truths, dtype=np.float64)
    if predictions.shape != truths.shape:
        raise DomainError(
            f"predictions {predictions.shape} and truths {truths.shape} differ"
        )
    if predictions.size == 0:
        raise DomainError("metrics need at least one sample")
    if predictions.ndim == 1:
        predictions, truths = predictions[:, None], truths[:, None]
    if predictions.ndim != 2 or predictions.shape[1] > len(AXES):
        raise DomainError(f"expected (N,) or (N, <=3) arrays, got {predictions.shape}")
    return predictions, truths


def axis_names(count: int) -> Tuple[str, ...]:
    """Names of the first ``count`` coordinates."""
    return AXES[:count]


def compute_metrics(predictions, truths) -> Dict[str, AxisMetrics]:
    """MSE, RMSE, MAE and R² = 1 - SS_res/SS_tot for every coordinate.

    Arrays are (N,) for one coordinate or (N, 3) for x, y and z.

    Raises:
        DomainError: when the arrays differ in shape or are empty.
    """
    predictions, truths = _columns(predictions, truths)
    metrics = {}
    for column, name in enumerate(axis_names(predictions.shape[1])):
        error = predictions[:, column] - truths[:, column]
        mse = float(np.mean(error**2))
        ss_res = float(np.sum(error**2))
        ss_tot = float(np.sum((truths[:, column] - truths[:, column].mean()) ** 2))
        defined = ss_tot > 0
        if not defined:
            logger.warning("Truths of %s do not vary, R² is undefined", name)
        metrics[name] = AxisMetrics(
            mse=mse,
            rmse=math.sqrt(mse),
            mae=float(np.mean(np.abs(error))),
            r_squared=1.0 - ss_res / ss_tot if defined else math.nan,
            r_squared_defined=defined,
        )
    return metrics


def residual_stats(
    predictions,
    truths,
    bins: int = 41,
    value_range: float = 0.25,
    band: float = 0.1,
) -> Dict[str, ResidualStats]:
    """Fixed-width histogram over ±value_range, quartiles and band coverage.

    ``within_band`` is the fraction of residuals with magnitude at most
    ``band``; ``outside`` counts residuals beyond the histogram range.
    """
    if bins < 1 or not value_range > 0 or band < 0:
        raise DomainError("bins, value_range and band must be positive")
    predictions, truths = _columns(predictions, truths)
    stats = {}
    for column, name in enumerate(axis_names(predictions.shape[1])):
        residual = predictions[:, column] - truths[:, column]
        counts, edges = np.histogram(
            residual, bins=bins, range=(-value_range, value_range)
        )
        q1, median, q3 = np.percentile(residual, [25, 50, 75])
        stats[name] = ResidualStats(
            counts=tuple(int(count) for count in counts),
            edges=tuple(float(edge) for edge in edges),
            outside=int(residual.size - counts.sum()),
            median=float(median),
            q1=float(q1),
            q3=float(q3),
            iqr=float(q3 - q1),
            within_band=float(np.mean(np.abs(residual) <= band)),
            band=band,
        )
    return stats
