"""Camera-jitter augmentation shared by all channels of a sample."""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import ndimage

from trenchsense.core.exceptions import DomainError
from trenchsense.dataset.samples import Sample

MAX_TRANSLATION_PX = 6.0
MAX_ROTATION_DEG = 10.0


@dataclass(frozen=True)
class AugmentSpec:
    """Bounds of the random rigid transform applied to a sample."""

    max_translation: float = 2.0
    max_rotation: float = 3.0
    probability: float = 0.5
    seed: int = 0

    def __post_init__(self):
        """Validate the bounds."""
        if not 0 <= self.max_translation <= MAX_TRANSLATION_PX:
            raise DomainError(f"max_translation must lie in [0, {MAX_TRANSLATION_PX}]")
        if not 0 <= self.max_rotation <= MAX_ROTATION_DEG:
            raise DomainError(f"max_rotation must lie in [0, {MAX_ROTATION_DEG}]")
        if not 0 <= self.probability <= 1:
            raise DomainError("probability must lie in [0, 1]")

    @classmethod
    def from_config(cls, section, seed: int = 0) -> "AugmentSpec":
        """Build from the ``augment`` section of a run configuration."""
        return cls(
            max_translation=section.max_translation,
            max_rotation=section.max_rotation,
            probability=section.probability,
            seed=seed,
        )


def apply_transform(
    channels: np.ndarray, dx: float, dy: float, rotation_deg: float
) -> np.ndarray:
    """Rotate about the tile centre then translate, identically on every channel.

    Pixels coming from outside the tile take the median of their channel.
    """
    _, height, width = channels.shape
    theta = math.radians(rotation_deg)
    cos, sin = math.cos(theta), math.sin(theta)
    # Output-to-input mapping in (row, col) coordinates
    inverse = np.array([[cos, sin], [-sin, cos]])
    centre = np.array([(height - 1) / 2, (width - 1) / 2])
    offset = centre - inverse @ (centre + np.array([dy, dx]))

    out = np.empty_like(channels)
    for index, channel in enumerate(channels):
        moved = ndimage.affine_transform(
            channel.astype(np.float64),
            inverse,
            offset=offset,
            order=1,
            mode="constant",
            cval=float(np.median(channel)),
        )
        out[index] = np.clip(np.rint(moved), 0, 255).astype(np.uint8)
    return out


def augment_channels(
    channels: np.ndarray, spec: AugmentSpec, rng: np.random.Generator
) -> np.ndarray:
    """Apply one random rigid transform, drawn from ``rng``, to a tile stack."""
    if rng.random() >= spec.probability:
        return channels
    dx, dy = rng.uniform(-spec.max_translation, spec.max_translation, size=2)
    rotation = rng.uniform(-spec.max_rotation, spec.max_rotation)
    return apply_transform(channels, dx, dy, rotation)


def augment(
    sample: Sample, spec: AugmentSpec, rng: Optional[np.random.Generator] = None
) -> Sample:
    """Apply one random rigid transform to all 25 channels; the label is kept."""
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    channels = augment_channels(sample.channels, spec, rng)
    if channels is sample.channels:
        return sample
    return Sample(channels, sample.label, sample.window)
