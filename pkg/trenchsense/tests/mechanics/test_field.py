"""
Test the 2D deformation field built by strip superposition
"""

import numpy as np
import pytest

from trenchsense.core.exceptions import DomainError
from trenchsense.mechanics.field import (
    build_deformation_field,
    default_contact_grid,
    strip_beam,
)
from trenchsense.mechanics.types import ContactLoad, DeformationField, TrenchOpening
from trenchsense.optics.geometry import SensorGeometry


def _field(geometry, material, x, y, z):
    load = ContactLoad.from_displacement(x, y, z, 85.4)
    return build_deformation_field(load, geometry, material)


def test_strip_beam(geometry, material):
    """One grid strip spans the window and carries a notch per cross."""
    beam = strip_beam(geometry, material)

    assert beam.length == pytest.approx(16e-3)
    assert beam.width == pytest.approx(2e-3)
    np.testing.assert_allclose(beam.notch_positions, [4e-3, 6e-3, 8e-3, 10e-3, 12e-3])
    assert beam.alpha == material.trench_depth
    assert beam.second_moment == pytest.approx(2e-3 * 1e-9 / 12)


def test_strip_beam_alpha_override(geometry, material):
    """The stress-free triangle height can be configured."""
    assert strip_beam(geometry, material, 4e-4).alpha == 4e-4


def test_default_contact_grid():
    """25 cross centres then 16 midpoints."""
    grid = default_contact_grid()

    assert len(grid) == 41
    assert grid[0] == (1.0, 1.0)
    assert grid[24] == (5.0, 5.0)
    assert grid[25] == (1.5, 1.5)
    assert len(default_contact_grid(include_midpoints=False)) == 25


def test_central_field_is_fourfold_symmetric(geometry, material):
    """A central load gives a field invariant under 90° rotations."""
    field = _field(geometry, material, 3, 3, 1.0)
    totals = field.opening_totals()
    scale = np.abs(totals).max()

    np.testing.assert_allclose(totals, totals.T, atol=1e-9 * scale)
    np.testing.assert_allclose(totals, np.rot90(totals), atol=1e-9 * scale)
    arms = field.arm_openings
    np.testing.assert_allclose(arms[..., 0], arms[..., 1].T, atol=1e-9 * scale)
    shifts = field.cross_shifts
    shift_scale = np.abs(shifts).max()
    np.testing.assert_allclose(
        shifts[..., 0], -shifts[:, ::-1, 0], atol=1e-9 * shift_scale
    )
    np.testing.assert_allclose(
        shifts[..., 0], shifts[..., 1].T, atol=1e-9 * shift_scale
    )


def test_central_field_peak_deflection(geometry, material):
    """The deflection map peaks at the displacement under the load."""
    field = _field(geometry, material, 3, 3, 1.2)

    assert field.deflection.max() == pytest.approx(1.2e-3, rel=1e-6)
    assert field.deflection[0].max() == 0.0
    assert field.deflection[:, -1].max() == pytest.approx(0.0, abs=1e-18)


def test_cross_shifts_point_away_from_contact(geometry, material):
    """Crosses left of a central load move left, crosses right move right."""
    field = _field(geometry, material, 3, 3, 1.0)

    assert field.cross_shifts[2, 1, 0] < 0
    assert field.cross_shifts[2, 3, 0] > 0
    assert field.cross_shifts[1, 2, 1] < 0
    assert field.cross_shifts[2, 2, 0] == pytest.approx(0.0, abs=1e-15)


def test_off_centre_field_decays_with_distance(geometry, material):
    """A load at (2, 2) opens (1, 1) more than (5, 5)."""
    totals = _field(geometry, material, 2, 2, 1.0).opening_totals()

    assert totals[0, 0] > totals[4, 4]


def test_mirror_loads_give_mirror_fields(geometry, material):
    """Loads at (2, 2) and (4, 4) produce point-mirrored opening tables."""
    first = _field(geometry, material, 2, 2, 1.0).opening_totals()
    second = _field(geometry, material, 4, 4, 1.0).opening_totals()

    np.testing.assert_allclose(first, second[::-1, ::-1], atol=1e-9 * abs(first).max())


def test_field_is_linear_in_force(geometry, material):
    """Doubling the force doubles every opening."""
    one = _field(geometry, material, 2, 3, 0.5).opening_totals()
    two = _field(geometry, material, 2, 3, 1.0).opening_totals()

    np.testing.assert_allclose(two, 2 * one, rtol=1e-9, atol=1e-20)


def test_zero_displacement_field_is_at_rest(geometry, material):
    """z = 0 leaves every trench closed and every cross in place."""
    field = _field(geometry, material, 3, 3, 0.0)

    assert not field.opening_totals().any()
    assert not field.cross_shifts.any()
    assert not field.deflection.any()


def test_field_rejects_load_outside_window(material):
    """A load beyond the window is outside the domain."""
    geometry = SensorGeometry(pitch=3.0, window=14.0)
    load = ContactLoad.from_displacement(6, 3, 1.0, 85.4)

    with pytest.raises(DomainError, match="is outside the window"):
        build_deformation_field(load, geometry, material)


@pytest.mark.parametrize(
    "arguments, message",
    [
        ((3.25, 3, 1.0, 85.4), "grid_x must be a grid index"),
        ((3, 3, 1.8, 154.0), "is outside"),
        ((3, 3, 1.0, -1.0), "force must be non-negative"),
    ],
)
def test_contact_load_validation(arguments, message):
    """Loads must sit on the grid and stay within the calibrated range."""
    x, y, z, force = arguments
    with pytest.raises(DomainError, match=message):
        ContactLoad(x, y, z, force)


def test_contact_load_from_force():
    """The displacement is derived as F/k."""
    load = ContactLoad.from_force(3, 3, 85.4, 85.4)

    assert load.displacement_z == pytest.approx(1.0)


def test_field_arrays_are_read_only():
    """A field is an immutable value."""
    field = DeformationField.at_rest()

    with pytest.raises(ValueError, match="read-only"):
        field.deflection[0, 0] = 1.0
    assert field.opening_totals().shape == (5, 5)


def test_trench_opening_arithmetic():
    """Openings superpose edge by edge and keep an exact total."""
    opening = TrenchOpening(1.0, 2.0) + TrenchOpening(0.5, 0.25).scaled(2)

    assert (opening.delta_left, opening.delta_right, opening.total) == (2.0, 2.5, 4.5)
