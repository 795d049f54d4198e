"""Value types of the notched-film mechanics model."""

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from trenchsense.core.exceptions import DomainError
from trenchsense.mechanics.stiffness import (
    displacement_from_force,
    force_from_displacement,
)

# Largest displacement covered by the force calibration, in mm
MAX_DISPLACEMENT_MM = 1.75


@dataclass(frozen=True)
class MaterialParams:
    """Film material constants in SI units."""

    young_modulus_eff: float = 1.2e6
    film_thickness: float = 1.0e-3
    composite_thickness: float = 230e-6
    trench_depth: float = 523e-6

    def __post_init__(self):
        """Validate the material constants."""
        for name in (
            "young_modulus_eff",
            "film_thickness",
            "composite_thickness",
            "trench_depth",
        ):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be strictly positive")
        if self.trench_depth >= self.film_thickness:
            raise DomainError("trench_depth must be smaller than film_thickness")
        if self.composite_thickness >= self.film_thickness:
            raise DomainError("composite_thickness must be smaller than film_thickness")

    @property
    def remaining_thickness(self) -> float:
        """Film thickness left under the bottom of a trench."""
        return self.film_thickness - self.trench_depth

    @classmethod
    def from_config(cls, section) -> "MaterialParams":
        """Build from the ``material`` section of a run configuration."""
        return cls(
            young_modulus_eff=section.young_modulus_eff,
            film_thickness=section.film_thickness,
            composite_thickness=section.composite_thickness,
            trench_depth=section.trench_depth,
        )


@dataclass(frozen=True)
class BeamSpec:
    """A clamped-clamped strip of film carrying a row of notches.

    All lengths are in metres, measured from the left support.
    """

    length: float
    width: float
    notch_positions: Tuple[float, ...]
    notch_width_d0: float
    alpha: float
    second_moment: float

    def __post_init__(self):
        """Validate the beam geometry."""
        object.__setattr__(self, "notch_positions", tuple(self.notch_positions))
        if not (self.length > 0 and self.width > 0 and self.second_moment > 0):
            raise DomainError("length, width and second_moment must be positive")
        if not self.alpha > 0:
            raise DomainError("alpha must be strictly positive")
        if not self.notch_width_d0 > 0:
            raise DomainError("notch_width_d0 must be strictly positive")
        for position in self.notch_positions:
            if not 0 < position < self.length:
                raise DomainError(f"notch at {position} m lies outside the beam")
        ordered = sorted(self.notch_positions)
        for left, right in zip(ordered, ordered[1:], strict=False):
            if right - left < 2 * self.alpha:
                raise DomainError(
                    f"notches at {left} m and {right} m overlap for alpha={self.alpha}"
                )


@dataclass(frozen=True)
class TrenchOpening:
    """Signed widening of one trench at its two edges, in metres."""

    delta_left: float
    delta_right: float
    total: float = field(default=math.nan)

    def __post_init__(self):
        """Fill the total, which is always the exact sum of both edges."""
        object.__setattr__(self, "total", self.delta_left + self.delta_right)

    def scaled(self, factor: float) -> "TrenchOpening":
        """Return the opening multiplied by a factor."""
        return TrenchOpening(self.delta_left * factor, self.delta_right * factor)

    def __add__(self, other: "TrenchOpening") -> "TrenchOpening":
        """Superpose two openings edge by edge."""
        return TrenchOpening(
            self.delta_left + other.delta_left, self.delta_right + other.delta_right
        )


@dataclass(frozen=True)
class MomentDiagram:
    """Piecewise-linear bending moment along a beam (N·m, sagging positive)."""

    samples: Tuple[Tuple[float, float], ...]
    load_position: float

    def moment_at(self, position: float) -> float:
        """Interpolate the moment at a position along the beam."""
        positions, moments = zip(*self.samples, strict=True)
        return float(np.interp(position, positions, moments))

    def higher_side(self, position: float, half_width: float) -> str:
        """Tell which edge of a notch sees the larger absolute moment."""
        left = abs(self.moment_at(position - half_width))
        right = abs(self.moment_at(position + half_width))
        return "left" if left >= right else "right"


@dataclass(frozen=True)
class ContactLoad:
    """A probe pressing the film at a grid location.

    ``grid_x``/``grid_y`` are grid indices (1 to 5, in steps of 0.5),
    ``displacement_z`` is in mm, ``force`` in mN and ``probe_diameter`` in m.
    Build instances with ``from_displacement`` or ``from_force`` so that the
    dependent quantity is derived from the stiffness coefficient.
    """

    grid_x: float
    grid_y: float
    displacement_z: float
    force: float
    probe_diameter: float = 1e-3

    def __post_init__(self):
        """Validate the load."""
        for name in ("grid_x", "grid_y"):
            doubled = 2 * getattr(self, name)
            if not math.isclose(doubled, round(doubled), abs_tol=1e-9):
                raise DomainError(f"{name} must be a grid index or half index")
        if not 0 <= self.displacement_z <= MAX_DISPLACEMENT_MM:
            raise DomainError(
                f"displacement_z={self.displacement_z} mm is outside "
                f"[0, {MAX_DISPLACEMENT_MM}] mm"
            )
        if self.force < 0:
            raise DomainError("force must be non-negative")
        if not self.probe_diameter > 0:
            raise DomainError("probe_diameter must be strictly positive")

    @classmethod
    def from_displacement(
        cls, grid_x: float, grid_y: float, displacement_z: float, k: float
    ) -> "ContactLoad":
        """Build a load from its displacement, deriving the force as k·z."""
        return cls(
            grid_x, grid_y, displacement_z, force_from_displacement(displacement_z, k)
        )

    @classmethod
    def from_force(
        cls, grid_x: float, grid_y: float, force: float, k: float
    ) -> "ContactLoad":
        """Build a load from its force, deriving the displacement as F/k."""
        return cls(grid_x, grid_y, displacement_from_force(force, k), force)


@dataclass(frozen=True, eq=False)
class DeformationField:
    """Deformation of the whole sensing window under one contact load.

    ``deflection`` is sampled on ``axis`` (metres) in both directions and
    indexed ``[y, x]``. ``trench_openings`` and the arrays below are indexed
    ``[row, col]``, i.e. ``[grid_y - 1, grid_x - 1]``. ``arm_openings[..., 0]``
    is the signed widening of the arm opened by bending along x, and
    ``[..., 1]`` the one opened by bending along y.
    """

    axis: np.ndarray
    deflection: np.ndarray
    trench_openings: Tuple[Tuple[TrenchOpening, ...], ...]
    cross_shifts: np.ndarray
    arm_openings: np.ndarray
    load: Optional[ContactLoad] = None

    def __post_init__(self):
        """Freeze the arrays."""
        for name in ("axis", "deflection", "cross_shifts", "arm_openings"):
            array = np.array(getattr(self, name), dtype=np.float64)
            array.flags.writeable = False
            object.__setattr__(self, name, array)
        for name in ("cross_shifts", "arm_openings"):
            if getattr(self, name).shape != (5, 5, 2):
                raise DomainError(f"{name} must have shape (5, 5, 2)")

    def opening_totals(self) -> np.ndarray:
        """Return the 5×5 array of total trench openings (m)."""
        return np.array(
            [[opening.total for opening in row] for row in self.trench_openings]
        )

    @classmethod
    def at_rest(cls, nodes: int = 161, window: float = 16e-3) -> "DeformationField":
        """Return the undeformed field."""
        zero = TrenchOpening(0.0, 0.0)
        return cls(
            axis=np.linspace(0.0, window, nodes),
            deflection=np.zeros((nodes, nodes)),
            trench_openings=tuple(tuple(zero for _ in range(5)) for _ in range(5)),
            cross_shifts=np.zeros((5, 5, 2)),
            arm_openings=np.zeros((5, 5, 2)),
        )
