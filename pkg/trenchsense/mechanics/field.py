"""Two-dimensional deformation of the sensing window by strip superposition.

The row and the column of film through the contact point are modelled as
independent clamped-clamped strips. Every trench opening along x (resp. y)
is taken from the x (resp. y) strip and attenuated by the normalised
deflection of the other strip at the trench row (resp. column). The
deflection map is the product of both strip deflection shapes.
"""

import logging
from typing import List, Optional, Tuple

import numpy as np

from trenchsense.core.exceptions import DomainError
from trenchsense.mechanics.beam import deflection_profile, notch_openings
from trenchsense.mechanics.types import (
    BeamSpec,
    ContactLoad,
    DeformationField,
    MaterialParams,
)
from trenchsense.optics.geometry import GRID_SIZE, SensorGeometry

logger = logging.getLogger(__name__)

MM = 1e-3
MILLINEWTON = 1e-3


def strip_beam(
    geometry: SensorGeometry, material: MaterialParams, alpha: Optional[float] = None
) -> BeamSpec:
    """One grid strip: window long, one pitch wide, notched at every cross."""
    width = geometry.pitch * MM
    return BeamSpec(
        length=geometry.window * MM,
        width=width,
        notch_positions=tuple(geometry.cross_positions() * MM),
        notch_width_d0=geometry.kerf * MM,
        alpha=alpha if alpha is not None else material.trench_depth,
        second_moment=width * material.film_thickness**3 / 12,
    )


def default_contact_grid(include_midpoints: bool = True) -> List[Tuple[float, float]]:
    """The 25 cross centres, then the 16 points between diagonal neighbours."""
    points = [
        (float(x), float(y))
        for y in range(1, GRID_SIZE + 1)
        for x in range(1, GRID_SIZE + 1)
    ]
    if include_midpoints:
        points += [
            (x + 0.5, y + 0.5) for y in range(1, GRID_SIZE) for x in range(1, GRID_SIZE)
        ]
    return points


def build_deformation_field(
    load: ContactLoad,
    geometry: SensorGeometry,
    material: MaterialParams,
    alpha: Optional[float] = None,
    nodes: int = 161,
) -> DeformationField:
    """Deformation of the window under a single contact load.

    Raises:
        DomainError: when the load lies outside the window.
    """
    x_mm = geometry.grid_to_mm(load.grid_x)
    y_mm = geometry.grid_to_mm(load.grid_y)
    if not geometry.contains(x_mm, y_mm):
        raise DomainError(
            f"load at grid ({load.grid_x}, {load.grid_y}) = ({x_mm}, {y_mm}) mm "
            "is outside the window"
        )

    beam = strip_beam(geometry, material, alpha)
    force = load.force * MILLINEWTON
    load_x = x_mm * MM
    load_y = y_mm * MM
    crosses = np.asarray(beam.notch_positions)

    along_x = notch_openings(beam, material.young_modulus_eff, load_x, force)
    along_y = notch_openings(beam, material.young_modulus_eff, load_y, force)
    shape_x, slope_x = deflection_profile(beam.length, load_x, crosses)
    shape_y, slope_y = deflection_profile(beam.length, load_y, crosses)

    openings = tuple(
        tuple(
            along_x[col].scaled(shape_y[row]) + along_y[row].scaled(shape_x[col])
            for col in range(GRID_SIZE)
        )
        for row in range(GRID_SIZE)
    )
    totals_x = np.array([opening.total for opening in along_x])
    totals_y = np.array([opening.total for opening in along_y])
    arm_openings = np.stack(
        (np.outer(shape_y, totals_x), np.outer(totals_y, shape_x)), axis=-1
    )

    peak = load.displacement_z * MM
    half_thickness = material.film_thickness / 2
    cross_shifts = np.stack(
        (
            -half_thickness * peak * np.outer(shape_y, slope_x),
            -half_thickness * peak * np.outer(slope_y, shape_x),
        ),
        axis=-1,
    )

    axis = np.linspace(0.0, beam.length, nodes)
    profile_x, _ = deflection_profile(beam.length, load_x, axis)
    profile_y, _ = deflection_profile(beam.length, load_y, axis)
    deflection = peak * np.outer(profile_y, profile_x)

    logger.debug(
        "Built field for load (%s, %s) z=%.3f mm F=%.2f mN",
        load.grid_x,
        load.grid_y,
        load.displacement_z,
        load.force,
    )
    return DeformationField(
        axis=axis,
        deflection=deflection,
        trench_openings=openings,
        cross_shifts=cross_shifts,
        arm_openings=arm_openings,
        load=load,
    )
