"""
Test the synthetic frame renderer
"""

from dataclasses import replace

import numpy as np
import pytest

from trenchsense.core.exceptions import DomainError
from trenchsense.mechanics.field import build_deformation_field
from trenchsense.mechanics.types import ContactLoad, DeformationField
from trenchsense.optics.render import (
    ImageMeta,
    RenderConfig,
    SyntheticImage,
    grid_point_px,
    render,
    render_intensity,
    rest_centres_px,
    stroke_value,
)


def _loaded(geometry, material, z=1.0, x=3, y=3):
    load = ContactLoad.from_displacement(x, y, z, 85.4)
    return build_deformation_field(load, geometry, material)


def test_render_at_rest(geometry, quiet_render_config):
    """Closed trenches show the baseline brightness on a dark background."""
    image = render(DeformationField.at_rest(), geometry, quiet_render_config)

    assert image.pixels.shape == (300, 300)
    assert image.pixels.dtype == np.uint8
    assert image.pixels.max() == 20
    assert image.pixels[0, 0] == 0
    assert image.pixels[90, 90] == 20


def test_render_is_deterministic(geometry, material, render_config):
    """The same seed gives the same noise, another seed other noise."""
    field = _loaded(geometry, material)

    first = render(field, geometry, render_config.with_seed(5))
    again = render(field, geometry, render_config.with_seed(5))
    other = render(field, geometry, render_config.with_seed(6))

    np.testing.assert_array_equal(first.pixels, again.pixels)
    assert not np.array_equal(first.pixels, other.pixels)
    assert first.meta.seed == 5


@pytest.mark.parametrize("z", [0.1, 0.5, 1.0, 1.37, 1.5])
def test_render_central_load_is_symmetric(geometry, material, quiet_render_config, z):
    """A central load renders the same frame after a quarter turn."""
    field = _loaded(geometry, material, z=z)
    pixels = render(field, geometry, quiet_render_config).pixels

    np.testing.assert_array_equal(pixels, np.rot90(pixels))
    np.testing.assert_array_equal(pixels, np.rot90(pixels, 2))
    mirrored = pixels.astype(int)
    assert np.abs(mirrored - np.fliplr(mirrored)).max() <= 1


def test_render_opens_central_cross(geometry, material, quiet_render_config):
    """Pressing brightens and widens the strokes of the loaded cross."""
    cfg = quiet_render_config
    rest = render_intensity(DeformationField.at_rest(), geometry, cfg)
    pressed = render_intensity(_loaded(geometry, material), geometry, cfg)

    centre = (slice(140, 160), slice(140, 160))
    assert pressed[centre].sum() > rest[centre].sum()
    assert pressed.max() > rest.max()


def test_render_stores_label_and_config_hash(geometry, material, render_config):
    """The metadata carries the label and the camera hash."""
    image = render(
        _loaded(geometry, material), geometry, render_config, label=(8.0, 8.0, 1.0)
    )

    assert image.meta.label == (8.0, 8.0, 1.0)
    assert image.meta.config_hash == render_config.config_hash(geometry)


def test_config_hash_ignores_seed(geometry, render_config):
    """The seed is provenance, not configuration."""
    base = render_config.config_hash(geometry)

    assert render_config.with_seed(99).config_hash(geometry) == base
    assert replace(render_config, gain=0.7).config_hash(geometry) != base


def test_stroke_value(geometry, render_config):
    """Closed trenches show the baseline, open ones add the gain term."""
    values = stroke_value(np.array([0.2, 0.4, 5.0]), geometry, render_config)

    np.testing.assert_allclose(values, [20.0, 20.0 + 255 * 0.6 * 0.2, 255.0])


def test_rest_centres_px(geometry, render_config):
    """Crosses sit every 30 px around the image centre."""
    centres = rest_centres_px(geometry, render_config)

    assert centres.shape == (5, 5, 2)
    np.testing.assert_allclose(centres[0, :, 0], [90, 120, 150, 180, 210])
    np.testing.assert_allclose(centres[:, 0, 1], [90, 120, 150, 180, 210])


@pytest.mark.parametrize(
    "overrides, message",
    [
        ({"width": 0}, "image dimensions must be positive"),
        ({"px_per_mm": 0.0}, "px_per_mm must be strictly positive"),
        ({"baseline_value": 255.0}, "baseline_value must lie"),
        ({"gain": -1.0}, "gain must be strictly positive"),
        ({"gamma": 0.0}, "gamma must be strictly positive"),
        ({"noise_sigma": -0.5}, "noise_sigma must be non-negative"),
    ],
)
def test_render_config_validation(overrides, message):
    """Invalid camera models are rejected."""
    with pytest.raises(DomainError, match=message):
        RenderConfig(**overrides)


def test_synthetic_image_validation():
    """Only 8-bit frames are accepted."""
    with pytest.raises(DomainError, match="pixels must be"):
        SyntheticImage(np.zeros((4, 4), dtype=np.float32))


def test_value_channel_of_colour_frame():
    """The value channel of a 3-plane frame is its per-pixel maximum."""
    pixels = np.zeros((2, 2, 3), dtype=np.uint8)
    pixels[0, 0] = (10, 200, 30)
    image = SyntheticImage(pixels, ImageMeta(None, 0, ""))

    assert image.value_channel[0, 0] == 200
    assert image.value_channel.shape == (2, 2)


@pytest.mark.parametrize(
    "grid, expected",
    [((3, 3), (150.0, 150.0)), ((2, 2), (120.0, 120.0)), ((1, 4.5), (90.0, 195.0))],
)
def test_grid_point_px(geometry, render_config, grid, expected):
    """Grid locations map onto the rest pixels of the crosses."""
    assert grid_point_px(geometry, render_config, *grid) == pytest.approx(expected)
