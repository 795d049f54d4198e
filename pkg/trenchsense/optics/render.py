"""Rendering of synthetic camera frames from a deformation field.

Light passes through the open trenches only, so each cross is drawn as two
bright axis-aligned strokes on a dark background. A stroke's width is the
trench width (rest kerf plus opening) and its brightness follows
``baseline + 255·gain·(width^gamma - kerf^gamma)``, widths in millimetres.
Strokes are rasterised with exact box-filter coverage on a 2× supersampled
grid expressed in coordinates centred on the image, so mirrored geometry
produces mirrored pixels exactly.
"""

import logging
from dataclasses import asdict, dataclass, field, replace
from typing import Optional, Tuple

import numpy as np

from trenchsense.core.exceptions import DomainError
from trenchsense.core.utils import stable_hash
from trenchsense.mechanics.types import DeformationField
from trenchsense.optics.geometry import GRID_SIZE, SensorGeometry

logger = logging.getLogger(__name__)

SUPERSAMPLE = 2
# Stroke geometry is snapped to this pixel fraction before rasterisation
QUANTUM = 1.0 / 1024


@dataclass(frozen=True)
class RenderConfig:
    """Camera model of the synthetic frames."""

    width: int = 300
    height: int = 300
    px_per_mm: float = 15.0
    background_value: float = 0.0
    baseline_value: float = 20.0
    gain: float = 0.6
    gamma: float = 1.0
    noise_sigma: float = 2.0
    seed: int = 0

    def __post_init__(self):
        """Validate the camera model."""
        if self.width < 1 or self.height < 1:
            raise DomainError("image dimensions must be positive")
        if not self.px_per_mm > 0:
            raise DomainError("px_per_mm must be strictly positive")
        if not 0 <= self.baseline_value < 255:
            raise DomainError("baseline_value must lie in [0, 255)")
        if not self.gain > 0:
            raise DomainError("gain must be strictly positive")
        if not self.gamma > 0:
            raise DomainError("gamma must be strictly positive")
        if self.noise_sigma < 0:
            raise DomainError("noise_sigma must be non-negative")

    @classmethod
    def from_config(cls, section, seed: int = 0) -> "RenderConfig":
        """Build from the ``render`` section of a run configuration."""
        return cls(**section.model_dump(), seed=seed)

    def with_seed(self, seed: int) -> "RenderConfig":
        """Return a copy using another noise seed."""
        return replace(self, seed=seed)

    def config_hash(self, geometry: SensorGeometry) -> str:
        """Hash of everything but the seed that determines a frame."""
        settings = asdict(self)
        settings.pop("seed")
        return stable_hash({"render": settings, "geometry": asdict(geometry)})


@dataclass(frozen=True)
class ImageMeta:
    """Provenance of a synthetic frame."""

    label: Optional[Tuple[float, float, float]]
    seed: int
    config_hash: str


@dataclass(frozen=True, eq=False)
class SyntheticImage:
    """An 8-bit grayscale (or 3-plane) frame and its provenance."""

    pixels: np.ndarray
    meta: ImageMeta = field(default_factory=lambda: ImageMeta(None, 0, ""))

    def __post_init__(self):
        """Check the pixel type."""
        if self.pixels.dtype != np.uint8 or self.pixels.ndim not in (2, 3):
            raise DomainError("pixels must be a 2D or 3D array of uint8")

    @property
    def value_channel(self) -> np.ndarray:
        """HSV value plane, which for grayscale is the image itself."""
        if self.pixels.ndim == 3:
            return self.pixels.max(axis=2)
        return self.pixels


def _snap(values: np.ndarray) -> np.ndarray:
    return np.round(np.asarray(values, dtype=np.float64) / QUANTUM) * QUANTUM


def rest_centres_px(geometry: SensorGeometry, cfg: RenderConfig) -> np.ndarray:
    """Absolute pixel coordinates (x, y) of every cross at rest, [row, col]."""
    offsets = (geometry.cross_positions() - geometry.window / 2) * cfg.px_per_mm
    xs = cfg.width / 2 + offsets
    ys = cfg.height / 2 + offsets
    return np.stack(np.meshgrid(xs, ys), axis=-1)


def grid_point_px(
    geometry: SensorGeometry, cfg: RenderConfig, grid_x: float, grid_y: float
) -> Tuple[float, float]:
    """Pixel coordinates (x, y) of a rest grid location, half indices allowed."""
    scale = cfg.px_per_mm
    middle = geometry.window / 2
    x = cfg.width / 2 + (geometry.grid_to_mm(grid_x) - middle) * scale
    y = cfg.height / 2 + (geometry.grid_to_mm(grid_y) - middle) * scale
    return float(x), float(y)


def stroke_value(width_mm: np.ndarray, geometry: SensorGeometry, cfg: RenderConfig):
    """Brightness of a trench stroke of a given width."""
    width_mm = np.maximum(width_mm, 0.0)
    light = width_mm**cfg.gamma - geometry.kerf**cfg.gamma
    return np.clip(cfg.baseline_value + 255.0 * cfg.gain * light, 0.0, 255.0)


def _coverage(centre: float, half: float, size: int) -> np.ndarray:
    """Fraction of every sub-pixel along one axis covered by [centre ± half]."""
    lower = np.arange(size * SUPERSAMPLE) / SUPERSAMPLE - size / 2
    upper = lower + 1.0 / SUPERSAMPLE
    overlap = np.minimum(upper, centre + half) - np.maximum(lower, centre - half)
    return np.clip(overlap, 0.0, None) * SUPERSAMPLE


def render_intensity(
    field: DeformationField, geometry: SensorGeometry, cfg: RenderConfig
) -> np.ndarray:
    """Noise-free floating point frame, before quantisation to 8 bits."""
    scale = cfg.px_per_mm
    offsets = (geometry.cross_positions() - geometry.window / 2) * scale
    shifts = _snap(field.cross_shifts * 1e3 * scale)
    widths_mm = np.maximum(geometry.kerf + field.arm_openings * 1e3, 0.0)
    widths = _snap(widths_mm * scale)
    values = stroke_value(widths_mm, geometry, cfg) - cfg.background_value
    half_arm = _snap(geometry.cross_arm * scale / 2)

    canvas = np.zeros((cfg.height * SUPERSAMPLE, cfg.width * SUPERSAMPLE))
    for row in range(GRID_SIZE):
        for col in range(GRID_SIZE):
            cx = offsets[col] + shifts[row, col, 0]
            cy = offsets[row] + shifts[row, col, 1]
            # Arm opened by bending along x runs along y, and the reverse
            strokes = (
                (widths[row, col, 0] / 2, half_arm, values[row, col, 0]),
                (half_arm, widths[row, col, 1] / 2, values[row, col, 1]),
            )
            for half_x, half_y, value in strokes:
                if value <= 0 or half_x <= 0 or half_y <= 0:
                    continue
                cover_x = _coverage(cx, half_x, cfg.width)
                cover_y = _coverage(cy, half_y, cfg.height)
                cols = np.flatnonzero(cover_x)
                rows = np.flatnonzero(cover_y)
                if cols.size == 0 or rows.size == 0:
                    continue
                block = (
                    slice(rows[0], rows[-1] + 1),
                    slice(cols[0], cols[-1] + 1),
                )
                stroke = np.outer(cover_y[block[0]], cover_x[block[1]]) * value
                np.maximum(canvas[block], stroke, out=canvas[block])

    frame = canvas.reshape(cfg.height, SUPERSAMPLE, cfg.width, SUPERSAMPLE).mean(
        axis=(1, 3)
    )
    return frame + cfg.background_value


def render(
    field: DeformationField,
    geometry: SensorGeometry,
    cfg: RenderConfig,
    label: Optional[Tuple[float, float, float]] = None,
) -> SyntheticImage:
    """Render the camera frame of a deformed film.

    Args:
        field: Deformation of the 5×5 trench grid.
        geometry: Trench layout.
        cfg: Camera model; ``cfg.seed`` drives the additive Gaussian noise.
        label: Optional (x, y, z) label in mm stored in the metadata.
    """
    frame = render_intensity(field, geometry, cfg)
    if cfg.noise_sigma > 0:
        rng = np.random.default_rng(cfg.seed)
        frame = frame + rng.normal(0.0, cfg.noise_sigma, size=frame.shape)
    pixels = np.clip(np.rint(frame), 0, 255).astype(np.uint8)
    return SyntheticImage(
        pixels=pixels,
        meta=ImageMeta(
            label=label, seed=cfg.seed, config_hash=cfg.config_hash(geometry)
        ),
    )
