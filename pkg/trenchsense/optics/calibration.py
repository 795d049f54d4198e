"""Camera response calibration against a brightness ratio."""

import csv
import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import List, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from trenchsense.core.exceptions import DataError
from trenchsense.mechanics.field import build_deformation_field
from trenchsense.mechanics.stiffness import DEFAULT_STIFFNESS_K
from trenchsense.mechanics.types import ContactLoad, MaterialParams
from trenchsense.optics.analysis import CENTRAL_REGION_PX, brightness_metric
from trenchsense.optics.exceptions import CalibrationError
from trenchsense.optics.geometry import SensorGeometry
from trenchsense.optics.render import (
    RenderConfig,
    SyntheticImage,
    render,
    grid_point_px,
    render_intensity,
)

logger = logging.getLogger(__name__)

# Noise-free brightness at 1.5 mm over the one at 0.5 mm, around the load
TARGET_BRIGHTNESS_RATIO = 3.2


@dataclass(frozen=True)
class BrightnessRow:
    """Central-region brightness of one displacement."""

    displacement_z: float
    brightness: float
    ratio: float


def _region_mean(
    frame: np.ndarray, center: Tuple[float, float], side: int = CENTRAL_REGION_PX
) -> float:
    left = int(round(center[0] - side / 2))
    top = int(round(center[1] - side / 2))
    return float(frame[top : top + side, left : left + side].mean())


def calibrate_gain(
    geometry: SensorGeometry,
    material: MaterialParams,
    cfg: RenderConfig,
    point: Tuple[float, float] = (3, 3),
    z_low: float = 0.5,
    z_high: float = 1.5,
    target: float = TARGET_BRIGHTNESS_RATIO,
    k: float = DEFAULT_STIFFNESS_K,
) -> RenderConfig:
    """Find the gain giving a target brightness ratio around the load, gamma fixed.

    The ratio is read on noise-free frames before 8-bit quantisation. The
    search spans gains up to the one that saturates the brightest stroke.

    Raises:
        CalibrationError: when no gain in that span reaches the target.
    """
    fields = [
        build_deformation_field(
            ContactLoad.from_displacement(point[0], point[1], z, k), geometry, material
        )
        for z in (z_low, z_high)
    ]

    center = grid_point_px(geometry, cfg, *point)

    def ratio(gain: float) -> float:
        trial = replace(cfg, gain=gain, noise_sigma=0.0)
        low, high = (
            _region_mean(render_intensity(field, geometry, trial), center)
            for field in fields
        )
        return high / low

    widths = np.maximum(geometry.kerf + fields[1].arm_openings * 1e3, 0.0)
    light = float((widths**cfg.gamma - geometry.kerf**cfg.gamma).max())
    if light <= 0:
        raise CalibrationError("the high displacement does not open any trench")
    upper = (255.0 - cfg.baseline_value) / (255.0 * light)
    lower = upper * 1e-6

    low_ratio, high_ratio = ratio(lower), ratio(upper)
    if not low_ratio <= target <= high_ratio:
        raise CalibrationError(
            f"brightness ratio {target} is outside the reachable range "
            f"[{low_ratio:.3f}, {high_ratio:.3f}] for gamma={cfg.gamma}"
        )
    gain = brentq(lambda g: ratio(g) - target, lower, upper, xtol=1e-9, rtol=1e-9)
    logger.info("Calibrated gain %.6f for brightness ratio %.3f", gain, target)
    return replace(cfg, gain=float(gain))


def brightness_table(
    geometry: SensorGeometry,
    material: MaterialParams,
    cfg: RenderConfig,
    displacements: Sequence[float] = (0.5, 1.0, 1.5),
    point: Tuple[float, float] = (3, 3),
    k: float = DEFAULT_STIFFNESS_K,
) -> List[BrightnessRow]:
    """Brightness around the loaded point over a displacement sweep.

    The square region is centred on the rest pixel of ``point``. Frames are
    rendered with the camera noise of ``cfg``, so the ratios read here sit
    slightly below the noise-free ratio that ``calibrate_gain`` targets.
    """
    center = grid_point_px(geometry, cfg, *point)
    rows = []
    reference = None
    for z in displacements:
        load = ContactLoad.from_displacement(point[0], point[1], z, k)
        field = build_deformation_field(load, geometry, material)
        image: SyntheticImage = render(field, geometry, cfg)
        value = brightness_metric(image, center=center)
        if reference is None:
            reference = value
        rows.append(
            BrightnessRow(z, value, value / reference if reference else float("nan"))
        )
    return rows


def write_brightness_csv(rows: Sequence[BrightnessRow], path: Path) -> Path:
    """Write a brightness sweep as CSV (displacement_mm, brightness, ratio)."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(["displacement_mm", "brightness", "ratio"])
            for row in rows:
                writer.writerow(
                    [
                        f"{row.displacement_z:g}",
                        repr(float(row.brightness)),
                        repr(float(row.ratio)),
                    ]
                )
    except OSError as e:
        raise DataError(f"Cannot write {path}: {e}") from e
    return path
