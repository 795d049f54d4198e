"""Closed-form model of a notched clamped-clamped strip.

Units are SI throughout: metres, newtons, pascals, newton-metres.
"""

from typing import Literal, Tuple

import numpy as np

from trenchsense.core.exceptions import DomainError
from trenchsense.mechanics.types import BeamSpec, MomentDiagram, TrenchOpening

# Edge coefficients of an off-centre notch; 49 + 17 = 3 * 22
LARGER_EDGE_COEFFICIENT = 49.0
SMALLER_EDGE_COEFFICIENT = 17.0
EDGE_DENOMINATOR = 22.0


def _check_section(width: float, young_modulus: float, alpha: float):
    if not width > 0:
        raise DomainError(f"width must be strictly positive, got {width}")
    if not young_modulus > 0:
        raise DomainError(f"E must be strictly positive, got {young_modulus}")
    if not alpha > 0:
        raise DomainError(f"alpha must be strictly positive, got {alpha}")


def fixed_fixed_moment(
    beam: BeamSpec, load_position: float, force: float
) -> MomentDiagram:
    """Moment diagram of a clamped-clamped beam under a point load.

    With a = load_position, b = L - a, the end moments are -F·a·b²/L² and
    -F·a²·b/L², and the moment under the load is 2F·a²·b²/L³.

    Raises:
        DomainError: when the load is at or beyond a support, or negative.
    """
    length = beam.length
    if not 0 < load_position < length:
        raise DomainError(
            f"load position {load_position} m must lie strictly inside (0, {length})"
        )
    if force < 0:
        raise DomainError(f"force must be non-negative, got {force} N")

    a = load_position
    b = length - a
    left = -force * a * b**2 / length**2
    right = -force * a**2 * b / length**2
    under_load = 2 * force * a**2 * b**2 / length**3
    return MomentDiagram(
        samples=((0.0, left), (a, under_load), (length, right)),
        load_position=a,
    )


def notch_extension_central(
    moment_at_notch: float, width: float, young_modulus: float, alpha: float
) -> float:
    """Widening of a notch sitting under the load: 3M/(w·E·α).

    A hogging (negative) moment gives a negative, closing extension.
    """
    _check_section(width, young_modulus, alpha)
    return 3.0 * moment_at_notch / (width * young_modulus * alpha)


def notch_extension_intermediate(
    moment_at_notch: float,
    width: float,
    young_modulus: float,
    alpha: float,
    larger_edge: Literal["left", "right"] = "left",
) -> TrenchOpening:
    """Widening of a notch away from the load, split between its two edges.

    The edge named by ``larger_edge`` receives 49M/(22wEα), the other one
    17M/(22wEα).
    """
    _check_section(width, young_modulus, alpha)
    scale = moment_at_notch / (EDGE_DENOMINATOR * width * young_modulus * alpha)
    larger = LARGER_EDGE_COEFFICIENT * scale
    smaller = SMALLER_EDGE_COEFFICIENT * scale
    if larger_edge == "left":
        return TrenchOpening(larger, smaller)
    if larger_edge == "right":
        return TrenchOpening(smaller, larger)
    raise DomainError(f"larger_edge must be 'left' or 'right', got {larger_edge!r}")


def strain_at(
    moment: float, fiber_distance_y: float, second_moment_i: float, young_modulus: float
) -> float:
    """Flexural strain ε = M·y/(I·E)."""
    if not second_moment_i > 0:
        raise DomainError(f"I must be strictly positive, got {second_moment_i}")
    if not young_modulus > 0:
        raise DomainError(f"E must be strictly positive, got {young_modulus}")
    return moment * fiber_distance_y / (second_moment_i * young_modulus)


def notch_openings(
    beam: BeamSpec, young_modulus: float, load_position: float, force: float
) -> Tuple[TrenchOpening, ...]:
    """Openings of every notch of a strip under a point load.

    The notch under the load uses the central formula split evenly between
    its edges; any other notch uses the intermediate formula with the moment
    read at its centreline.
    """
    diagram = fixed_fixed_moment(beam, load_position, force)
    tolerance = 1e-9 * beam.length
    openings = []
    for position in beam.notch_positions:
        moment = diagram.moment_at(position)
        if abs(position - load_position) <= tolerance:
            total = notch_extension_central(
                moment, beam.width, young_modulus, beam.alpha
            )
            openings.append(TrenchOpening(total / 2, total / 2))
        else:
            openings.append(
                notch_extension_intermediate(
                    moment,
                    beam.width,
                    young_modulus,
                    beam.alpha,
                    larger_edge=diagram.higher_side(position, beam.alpha),
                )
            )
    return tuple(openings)


def _raw_shape(length: float, a: float, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Unscaled clamped-clamped point-load deflection and its derivative."""
    b = length - a
    x = np.asarray(x, dtype=np.float64)
    s = length - x
    left = x <= a
    shape = np.where(
        left,
        b**2 * x**2 * (3 * a * length - (3 * a + b) * x),
        a**2 * s**2 * (3 * b * length - (3 * b + a) * s),
    )
    slope = np.where(
        left,
        b**2 * (6 * a * length * x - 3 * (3 * a + b) * x**2),
        -(a**2) * (6 * b * length * s - 3 * (3 * b + a) * s**2),
    )
    return shape, slope


def deflection_profile(
    length: float, load_position: float, x: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """Deflection shape of a clamped-clamped strip, scaled to a unit peak.

    Returns:
        The shape at ``x`` and its derivative d(shape)/dx in 1/m.
    """
    if not 0 < load_position < length:
        raise DomainError(
            f"load position {load_position} m must lie strictly inside (0, {length})"
        )
    a = load_position
    b = length - a
    candidates = [a]
    turning_left = 2 * a * length / (3 * a + b)
    if turning_left <= a:
        candidates.append(turning_left)
    turning_right = length - 2 * b * length / (3 * b + a)
    if turning_right >= a:
        candidates.append(turning_right)
    peak = float(np.max(_raw_shape(length, a, np.array(candidates))[0]))

    shape, slope = _raw_shape(length, a, x)
    return shape / peak, slope / peak
