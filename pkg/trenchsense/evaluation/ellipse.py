"""Confidence ellipses of planar (x, y) errors."""

import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy import stats

from trenchsense.core.exceptions import DomainError

logger = logging.getLogger(__name__)

DEFAULT_COVERAGE = 0.95
# Minor over major variance below which an ellipse is flagged as degenerate
DEGENERACY_RATIO = 1e-12


def chi2_quantile(p: float = DEFAULT_COVERAGE, dof: int = 2) -> float:
    """Quantile of the chi-square distribution.

    With 2 degrees of freedom it equals -2·ln(1 - p), 5.9915 for p = 0.95.
    """
    if not 0 < p < 1:
        raise DomainError(f"p must lie in (0, 1), got {p}")
    if dof < 1:
        raise DomainError(f"dof must be at least 1, got {dof}")
    return float(stats.chi2.ppf(p, dof))


@dataclass(frozen=True)
class ErrorEllipse:
    """Region holding ``coverage`` of a bivariate normal error distribution.

    ``orientation`` is the angle of the major axis from +x, in (-π/2, π/2].
    """

    center: Tuple[float, float]
    semi_axes: Tuple[float, float]
    orientation: float
    coverage: float = DEFAULT_COVERAGE
    degenerate: bool = False

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Tell which (x, y) points lie inside or on the ellipse."""
        points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
        major, minor = self.semi_axes
        if self.degenerate or minor == 0:
            return np.zeros(len(points), dtype=bool)
        cos, sin = math.cos(self.orientation), math.sin(self.orientation)
        shifted = points - np.asarray(self.center)
        along = shifted[:, 0] * cos + shifted[:, 1] * sin
        across = -shifted[:, 0] * sin + shifted[:, 1] * cos
        return (along / major) ** 2 + (across / minor) ** 2 <= 1.0


def error_ellipse(residuals, coverage: float = DEFAULT_COVERAGE) -> ErrorEllipse:
    """Ellipse from the eigendecomposition of the 2×2 sample covariance.

    Semi-axes are sqrt(q·λ) with λ the covariance eigenvalues and q the
    ``coverage`` quantile of the chi-square distribution with 2 degrees of
    freedom. A rank-deficient covariance gives a ``degenerate`` ellipse.

    Raises:
        DomainError: with fewer than 3 residual pairs.
    """
    residuals = np.asarray(residuals, dtype=np.float64)
    if residuals.ndim != 2 or residuals.shape[1] != 2:
        raise DomainError(f"expected (N, 2) residuals, got {residuals.shape}")
    if len(residuals) < 3:
        raise DomainError(
            f"an error ellipse needs at least 3 pairs, got {len(residuals)}"
        )

    center = residuals.mean(axis=0)
    covariance = np.cov(residuals, rowvar=False)
    eigenvalues, eigenvectors = np.linalg.eigh(covariance)
    minor_var, major_var = np.clip(eigenvalues, 0.0, None)
    major_x, major_y = eigenvectors[:, 1]
    orientation = math.atan2(major_y, major_x)
    if orientation <= -math.pi / 2:
        orientation += math.pi
    elif orientation > math.pi / 2:
        orientation -= math.pi

    degenerate = major_var == 0 or minor_var <= DEGENERACY_RATIO * major_var
    if degenerate:
        logger.warning("Residual covariance is rank deficient, ellipse degenerate")
    scale = chi2_quantile(coverage, 2)
    return ErrorEllipse(
        center=(float(center[0]), float(center[1])),
        semi_axes=(math.sqrt(scale * major_var), math.sqrt(scale * minor_var)),
        orientation=orientation,
        coverage=coverage,
        degenerate=bool(degenerate),
    )
