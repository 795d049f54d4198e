"""Brightness readings and cross localisation on synthetic frames."""

import logging
from typing import Optional, Tuple

import numpy as np

from trenchsense.core.exceptions import DomainError
from trenchsense.optics.geometry import GRID_SIZE, SensorGeometry
from trenchsense.optics.render import RenderConfig, SyntheticImage, rest_centres_px

logger = logging.getLogger(__name__)

CENTRAL_REGION_PX = 60


def _region(
    shape: Tuple[int, int], center: Optional[Tuple[float, float]], side: int
) -> Tuple[slice, slice]:
    height, width = shape
    if center is None:
        center = (width / 2, height / 2)
    left = int(round(center[0] - side / 2))
    top = int(round(center[1] - side / 2))
    if side < 1 or left < 0 or top < 0 or left + side > width or top + side > height:
        raise DomainError(
            f"{side}x{side} region centred at {center} is outside the "
            f"{width}x{height} image"
        )
    return slice(top, top + side), slice(left, left + side)


def brightness_metric(
    img: SyntheticImage,
    center: Optional[Tuple[float, float]] = None,
    side: int = CENTRAL_REGION_PX,
) -> float:
    """Mean value-channel brightness of a square region.

    Args:
        img: Frame to read.
        center: Region centre (x, y) in pixels; the image centre by default.
        side: Side of the square region in pixels.

    Raises:
        DomainError: when the region does not fit inside the image.
    """
    value = img.value_channel
    rows, cols = _region(value.shape, center, side)
    return float(value[rows, cols].mean())


def cross_region_brightness(
    img: SyntheticImage,
    threshold: float,
    center: Optional[Tuple[float, float]] = None,
    side: int = CENTRAL_REGION_PX,
) -> float:
    """Mean brightness of the trench pixels only (above ``threshold``)."""
    value = img.value_channel
    rows, cols = _region(value.shape, center, side)
    region = value[rows, cols].astype(np.float64)
    lit = region[region > threshold]
    return float(lit.mean()) if lit.size else 0.0


def detect_cross_centers(
    img: SyntheticImage,
    geometry: SensorGeometry,
    cfg: RenderConfig,
    threshold: Optional[float] = None,
) -> np.ndarray:
    """Brightness-weighted centroid of the strokes inside each grid cell.

    Cells are pitch-sized squares around the rest position of every cross.
    Pixels count as stroke when brighter than ``threshold``, by default half
    way between the background and the closed-trench brightness.

    Returns:
        Array of shape (5, 5, 2) with (x, y) pixel coordinates per [row, col];
        cells without any stroke pixel hold NaN.
    """
    if threshold is None:
        threshold = (cfg.background_value + cfg.baseline_value) / 2
    value = img.value_channel.astype(np.float64)
    height, width = value.shape
    half_cell = geometry.pitch * cfg.px_per_mm / 2
    rest = rest_centres_px(geometry, cfg)
    centres = np.full((GRID_SIZE, GRID_SIZE, 2), np.nan)

    for row in range(GRID_SIZE):
        for col in range(GRID_SIZE):
            cx, cy = rest[row, col]
            x0 = max(int(round(cx - half_cell)), 0)
            x1 = min(int(round(cx + half_cell)), width)
            y0 = max(int(round(cy - half_cell)), 0)
            y1 = min(int(round(cy + half_cell)), height)
            cell = value[y0:y1, x0:x1]
            weights = np.where(cell > threshold, cell - cfg.background_value, 0.0)
            total = weights.sum()
            if total <= 0:
                logger.debug("No stroke found in cell (%s, %s)", row + 1, col + 1)
                continue
            ys, xs = np.mgrid[y0:y1, x0:x1]
            centres[row, col, 0] = ((xs + 0.5) * weights).sum() / total
            centres[row, col, 1] = ((ys + 0.5) * weights).sum() / total
    return centres
