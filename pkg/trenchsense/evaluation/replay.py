"""Temporal replay of a pressing cycle through a trained network."""

import logging
import math
import time
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from trenchsense.core.exceptions import DomainError
from trenchsense.core.utils import child_rng
from trenchsense.dataset.samples import CHANNELS, TILE, crop_25
from trenchsense.mechanics.field import build_deformation_field
from trenchsense.mechanics.stiffness import DEFAULT_STIFFNESS_K
from trenchsense.mechanics.types import ContactLoad, MaterialParams
from trenchsense.neuralnet.network import Network
from trenchsense.neuralnet.training import LABEL_SCALE, denormalize_labels, rescale
from trenchsense.optics.geometry import SensorGeometry
from trenchsense.optics.render import RenderConfig, render

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ReplayTrack:
    """Preprocessed frames of a pressing cycle and their true labels (mm)."""

    times: np.ndarray
    frames: np.ndarray
    truths: np.ndarray
    fps: float


@dataclass(frozen=True, eq=False)
class ReplayResult:
    """Per-frame predictions (mm), derived forces (mN) and residuals."""

    times: np.ndarray
    predictions: np.ndarray
    forces: np.ndarray
    truths: np.ndarray
    residuals: np.ndarray
    frames_per_second: float


def make_replay_track(
    geometry: SensorGeometry,
    material: MaterialParams,
    cfg: RenderConfig,
    point: Tuple[float, float] = (3, 3),
    frames: int = 500,
    fps: float = 30.0,
    z_min: float = 0.2,
    z_max: float = 1.4,
    frequency: float = 0.5,
    seed: int = 0,
    k: float = DEFAULT_STIFFNESS_K,
    alpha: Optional[float] = None,
    nodes: int = 161,
) -> ReplayTrack:
    """Render a raised-cosine displacement cycle at one contact point.

    The displacement goes from ``z_min`` to ``z_max`` and back once per
    period of ``1 / frequency`` seconds. Each frame gets its own noise seed.
    """
    if frames < 1 or not fps > 0 or not frequency > 0:
        raise DomainError("frames, fps and frequency must be positive")
    if not 0 <= z_min <= z_max:
        raise DomainError(f"invalid displacement range [{z_min}, {z_max}] mm")
    times = np.arange(frames) / fps
    depths = z_min + (z_max - z_min) * (1 - np.cos(2 * math.pi * frequency * times)) / 2
    x_mm, y_mm = geometry.grid_to_mm(point[0]), geometry.grid_to_mm(point[1])

    stack = np.empty((frames, CHANNELS, TILE, TILE), dtype=np.uint8)
    for index, z in enumerate(depths):
        load = ContactLoad.from_displacement(point[0], point[1], float(z), k)
        field = build_deformation_field(load, geometry, material, alpha, nodes)
        frame_seed = int(child_rng(seed, index).integers(2**31))
        image = render(field, geometry, cfg.with_seed(frame_seed))
        stack[index] = crop_25(image, geometry, cfg)
    truths = np.column_stack(
        [np.full(frames, x_mm), np.full(frames, y_mm), depths]
    )
    logger.info("Rendered a %s-frame replay track at %s fps", frames, fps)
    return ReplayTrack(times=times, frames=stack, truths=truths, fps=fps)


def replay(
    network: Network,
    track: ReplayTrack,
    k: float = DEFAULT_STIFFNESS_K,
    label_scale=LABEL_SCALE,
) -> ReplayResult:
    """Predict every frame in order and derive the force F = k·max(ẑ, 0).

    Frames are processed one at a time, as a live camera would deliver them;
    the reported rate is predictions per wall-clock second.

    Raises:
        DomainError: when the frames do not match the network input.
    """
    if k < 0:
        raise DomainError(f"stiffness must be non-negative, got {k} mN/mm")
    frames = track.frames
    height, width, channels = network.spec.input_shape
    if frames.ndim != 4 or frames.shape[1:] != (channels, height, width):
        raise DomainError(
            f"frames of shape {frames.shape[1:]} do not match the "
            f"{network.spec.name} input ({channels}, {height}, {width})"
        )
    if len(frames) != len(track.truths):
        raise DomainError("the track holds a different number of frames and truths")

    network.eval_mode()
    predictions = np.empty((len(frames), 3))
    start = time.perf_counter()
    for index, frame in enumerate(frames):
        output = network.predict(rescale(frame[None]), batch_size=1)
        predictions[index] = denormalize_labels(output, label_scale)[0]
    elapsed = time.perf_counter() - start
    rate = len(frames) / elapsed if elapsed > 0 else math.inf

    forces = k * np.clip(predictions[:, 2], 0.0, None)
    logger.info("Replayed %s frames at %.1f predictions per second", len(frames), rate)
    return ReplayResult(
        times=track.times,
        predictions=predictions,
        forces=forces,
        truths=track.truths,
        residuals=predictions - track.truths,
        frames_per_second=rate,
    )
