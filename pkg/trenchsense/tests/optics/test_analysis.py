"""
Test brightness readings and cross localisation
"""

import numpy as np
import pytest

from trenchsense.core.exceptions import DomainError
from trenchsense.mechanics.field import build_deformation_field
from trenchsense.mechanics.types import ContactLoad, DeformationField
from trenchsense.optics.analysis import (
    brightness_metric,
    cross_region_brightness,
    detect_cross_centers,
)
from trenchsense.optics.render import SyntheticImage, render, rest_centres_px


def _uniform(value, size=100):
    return SyntheticImage(np.full((size, size), value, dtype=np.uint8))


def test_brightness_metric_uniform_image():
    """A uniform frame reads its own value."""
    assert brightness_metric(_uniform(42)) == pytest.approx(42.0)


def test_brightness_metric_off_centre_region():
    """The region can be centred anywhere it fits."""
    pixels = np.zeros((100, 100), dtype=np.uint8)
    pixels[:50, :50] = 100

    image = SyntheticImage(pixels)

    assert brightness_metric(image, center=(20, 20), side=20) == pytest.approx(100.0)
    assert brightness_metric(image) == pytest.approx(25.0)


@pytest.mark.parametrize(
    "center, side",
    [((10, 10), 60), ((50, 50), 120), ((50, 50), 0)],
)
def test_brightness_metric_rejects_regions_outside_image(center, side):
    """Regions crossing the border are outside the domain."""
    with pytest.raises(DomainError, match="is outside the"):
        brightness_metric(_uniform(1), center=center, side=side)


def test_cross_region_brightness_ignores_background():
    """Only pixels above the threshold contribute."""
    pixels = np.zeros((100, 100), dtype=np.uint8)
    pixels[45:55, 45:55] = 80

    image = SyntheticImage(pixels)

    assert cross_region_brightness(image, threshold=10) == pytest.approx(80.0)
    assert cross_region_brightness(_uniform(5), threshold=10) == 0.0


def test_detect_cross_centers_at_rest(geometry, quiet_render_config):
    """Undeformed crosses are found at their rest positions."""
    image = render(DeformationField.at_rest(), geometry, quiet_render_config)

    centres = detect_cross_centers(image, geometry, quiet_render_config)

    rest = rest_centres_px(geometry, quiet_render_config)
    np.testing.assert_allclose(centres, rest, atol=0.5)


def test_detect_cross_centers_follow_the_film(
    geometry, material, quiet_render_config
):
    """Crosses beside a central load are dragged away from it."""
    load = ContactLoad.from_displacement(3, 3, 1.5, 85.4)
    field = build_deformation_field(load, geometry, material)
    image = render(field, geometry, quiet_render_config)

    centres = detect_cross_centers(image, geometry, quiet_render_config)

    rest = rest_centres_px(geometry, quiet_render_config)
    assert centres[2, 1, 0] < rest[2, 1, 0] - 0.5
    assert centres[2, 3, 0] > rest[2, 3, 0] + 0.5
    assert centres[2, 2, 0] == pytest.approx(rest[2, 2, 0], abs=0.5)


def test_detect_cross_centers_empty_cells(geometry, render_config):
    """Cells without strokes report NaN."""
    image = SyntheticImage(np.zeros((300, 300), dtype=np.uint8))

    centres = detect_cross_centers(image, geometry, render_config)

    assert np.isnan(centres).all()
