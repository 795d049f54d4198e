"""Reading and writing synthetic frames."""

import json
from dataclasses import asdict
from pathlib import Path

import numpy as np
from PIL import Image

from trenchsense.core.exceptions import DataError
from trenchsense.optics.render import ImageMeta, SyntheticImage


def _as_pil(img: SyntheticImage) -> Image.Image:
    pixels = img.value_channel if img.pixels.ndim == 3 else img.pixels
    # A 2D uint8 array maps to an 8-bit grayscale ("L") image
    return Image.fromarray(np.ascontiguousarray(pixels))


def write_pgm(img: SyntheticImage, path: Path) -> Path:
    """Write a binary 8-bit PGM (P5) file."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        _as_pil(img).save(path, format="PPM")
    except OSError as e:
        raise DataError(f"Cannot write {path}: {e}") from e
    return path


def write_png(img: SyntheticImage, path: Path) -> Path:
    """Write an 8-bit grayscale PNG file."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        _as_pil(img).save(path, format="PNG")
    except OSError as e:
        raise DataError(f"Cannot write {path}: {e}") from e
    return path


def write_sidecar(img: SyntheticImage, path: Path) -> Path:
    """Write the frame metadata as one JSON object next to the image."""
    path = Path(path)
    try:
        path.write_text(json.dumps(asdict(img.meta), sort_keys=True) + "\n")
    except OSError as e:
        raise DataError(f"Cannot write {path}: {e}") from e
    return path


def read_image(path: Path, sidecar: bool = True) -> SyntheticImage:
    """Read a grayscale frame, with its metadata when a sidecar exists."""
    path = Path(path)
    try:
        with Image.open(path) as handle:
            pixels = np.asarray(handle.convert("L"), dtype=np.uint8).copy()
    except (OSError, ValueError) as e:
        raise DataError(f"Cannot read image {path}: {e}") from e

    meta = ImageMeta(label=None, seed=0, config_hash="")
    meta_path = path.with_suffix(".json")
    if sidecar and meta_path.exists():
        try:
            payload = json.loads(meta_path.read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise DataError(f"Cannot read sidecar {meta_path}: {e}") from e
        label = payload.get("label")
        meta = ImageMeta(
            label=tuple(label) if label is not None else None,
            seed=int(payload.get("seed", 0)),
            config_hash=str(payload.get("config_hash", "")),
        )
    return SyntheticImage(pixels=pixels, meta=meta)
