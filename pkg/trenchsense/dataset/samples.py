"""Training samples: the 25-crop preprocessing and the ``.tsb`` file format.

A ``.tsb`` file is a 32-byte little-endian header followed by the raw
channel bytes in row-major (channel, row, column) order::

    offset  size  field
    0       2     magic, b"TS"
    2       1     format version (1)
    3       1     channel count
    4       2     tile height
    6       2     tile width
    8       24    label x, y, z in mm as three float64
"""

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Tuple

import numpy as np

from trenchsense.core.exceptions import DataError, DomainError
from trenchsense.optics.geometry import DEFAULT_WINDOW_MM, GRID_SIZE, SensorGeometry
from trenchsense.optics.render import RenderConfig, SyntheticImage, rest_centres_px

TILE = 60
CHANNELS = GRID_SIZE * GRID_SIZE
MAX_TRAINING_Z = 1.5

MAGIC = b"TS"
FORMAT_VERSION = 1
HEADER = struct.Struct("<2sBBHH3d")


@dataclass(frozen=True, eq=False)
class Sample:
    """25 stacked 60×60 tiles and the (x, y, z) contact label in mm.

    ``window`` is the side of the sensing window the label lies in, in mm.
    """

    channels: np.ndarray
    label: Tuple[float, float, float]
    window: float = DEFAULT_WINDOW_MM

    def __post_init__(self):
        """Validate the tile stack and the label."""
        if self.channels.dtype != np.uint8 or self.channels.shape != (
            CHANNELS,
            TILE,
            TILE,
        ):
            raise DomainError(
                f"a sample holds {CHANNELS}x{TILE}x{TILE} uint8 channels, "
                f"got {self.channels.dtype} {self.channels.shape}"
            )
        x, y, z = (float(value) for value in self.label)
        if not (0 <= x <= self.window and 0 <= y <= self.window):
            raise DomainError(
                f"label ({x}, {y}) lies outside the window [0, {self.window}] mm"
            )
        if not 0 <= z <= MAX_TRAINING_Z:
            raise DomainError(f"label z={z} mm is outside [0, {MAX_TRAINING_Z}] mm")
        object.__setattr__(self, "label", (x, y, z))


def crop_25(
    img: SyntheticImage, geometry: SensorGeometry, cfg: RenderConfig
) -> np.ndarray:
    """Cut one 60×60 tile centred on every cross rest position.

    Channel ``(row - 1) * 5 + (col - 1)`` holds the cross of grid cell
    (row, col).

    Raises:
        DomainError: when a tile is clipped by the image border.
    """
    value = img.value_channel
    height, width = value.shape
    centres = rest_centres_px(geometry, cfg)
    tiles = np.empty((CHANNELS, TILE, TILE), dtype=np.uint8)
    for row in range(GRID_SIZE):
        for col in range(GRID_SIZE):
            cx, cy = centres[row, col]
            left = int(round(cx)) - TILE // 2
            top = int(round(cy)) - TILE // 2
            if left < 0 or top < 0 or left + TILE > width or top + TILE > height:
                raise DomainError(
                    f"tile of cell ({row + 1}, {col + 1}) leaves the {width}x{height} "
                    f"image; check px_per_mm={cfg.px_per_mm}"
                )
            tiles[row * GRID_SIZE + col] = value[top : top + TILE, left : left + TILE]
    return tiles


def write_sample(sample: Sample, path: Path) -> Path:
    """Write a sample as a ``.tsb`` file."""
    path = Path(path)
    channels, height, width = sample.channels.shape
    header = HEADER.pack(MAGIC, FORMAT_VERSION, channels, height, width, *sample.label)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(header + np.ascontiguousarray(sample.channels).tobytes())
    except OSError as e:
        raise DataError(f"Cannot write sample {path}: {e}") from e
    return path


def read_sample(path: Path, window: float = DEFAULT_WINDOW_MM) -> Sample:
    """Read a ``.tsb`` file whose label lies in a window of side ``window`` mm.

    Raises:
        DataError: when the file is missing, truncated or not a sample.
    """
    path = Path(path)
    try:
        payload = path.read_bytes()
    except OSError as e:
        raise DataError(f"Cannot read sample {path}: {e}") from e
    if len(payload) < HEADER.size:
        raise DataError(f"{path} is shorter than the sample header")
    magic, version, channels, height, width, x, y, z = HEADER.unpack_from(payload)
    if magic != MAGIC:
        raise DataError(f"{path} is not a sample file (magic {magic!r})")
    if version != FORMAT_VERSION:
        raise DataError(f"{path} uses unsupported format version {version}")
    expected = HEADER.size + channels * height * width
    if len(payload) != expected:
        raise DataError(f"{path} holds {len(payload)} bytes, expected {expected}")
    pixels = np.frombuffer(payload, dtype=np.uint8, offset=HEADER.size)
    return Sample(pixels.reshape(channels, height, width).copy(), (x, y, z), window)
