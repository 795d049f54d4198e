"""Finite-difference reference solution of a notched clamped-clamped strip.

The strip is discretised on a uniform grid of nodes. The deflection ``w`` is
found by minimising the discrete bending energy ½ Σ EI_i·κ_i²·q_i with
κ_i the central second difference, clamped ends enforced through mirrored
ghost nodes. Each notch is a V groove: the remaining thickness falls linearly
from the film thickness at the edge of its footprint (half-width d0/2) to
``film_thickness - trench_depth`` on its centreline, and the second moment
follows the cube of that thickness. Nodal flexibilities are integrated
exactly over each node's control volume.

Notch openings are mouth displacements of the groove. The two flanks turn
about the mid-plane of the ligament left under the groove; each edge moves
by the curvature M/(E·I(x)) of the real grooved section, integrated over its
half of the footprint, times the lever from that hinge to the mouth,
``film_thickness - remaining_thickness / 2``. The stress-free triangle of
the closed form plays no part here.
"""

import logging
import warnings
from dataclasses import dataclass
from typing import Dict, Iterable, List, Tuple

import numpy as np
from scipy import sparse
from scipy.integrate import trapezoid
from scipy.sparse.linalg import MatrixRankWarning, spsolve

from trenchsense.core.exceptions import DomainError, NumericError
from trenchsense.mechanics.beam import fixed_fixed_moment, notch_extension_central
from trenchsense.mechanics.types import BeamSpec, MaterialParams, TrenchOpening

logger = logging.getLogger(__name__)

MIN_NODES = 201
MIN_NODES_PER_NOTCH = 5
# Samples per half footprint for the flank rotation integral
FOOTPRINT_SAMPLES = 513

# Positions of the reference locations along a 16 mm strip, in metres
DEFAULT_LOCATIONS = {"A": 4e-3, "B": 6e-3, "C": 8e-3}


class SingularSystemError(NumericError):
    """Raised when the discrete stiffness matrix cannot be factorised."""


@dataclass(frozen=True, eq=False)
class OracleResult:
    """Nodal solution of the finite-difference strip."""

    positions: np.ndarray
    deflection: np.ndarray
    moment: np.ndarray
    openings: Tuple[TrenchOpening, ...]


@dataclass(frozen=True)
class OracleComparison:
    """Analytical and reference opening of one notch under one load."""

    location: str
    position: float
    force: float
    analytical: TrenchOpening
    oracle: TrenchOpening

    @property
    def discrepancy(self) -> float:
        """Relative gap (analytical - oracle) / oracle on the total opening."""
        if self.oracle.total == 0:
            return 0.0
        return (self.analytical.total - self.oracle.total) / self.oracle.total


def _groove_flexibility(
    lower: np.ndarray,
    upper: np.ndarray,
    centre: float,
    half_width: float,
    thickness: float,
    remaining: float,
) -> np.ndarray:
    """Extra flexibility ∫ ((h/t)³ - 1) dx of one V groove over [lower, upper]."""
    slope = (thickness - remaining) / half_width

    def antiderivative(u):
        return -(thickness**3) / (2 * slope * (remaining + slope * u) ** 2) - u

    extra = np.zeros_like(lower)
    for side in (-1.0, 1.0):
        side_lo, side_hi = sorted((centre, centre + side * half_width))
        lo = np.maximum(lower, side_lo)
        hi = np.minimum(upper, side_hi)
        inside = hi > lo
        u_a = np.abs(np.where(inside, lo, centre) - centre)
        u_b = np.abs(np.where(inside, hi, centre) - centre)
        u0 = np.minimum(u_a, u_b)
        u1 = np.maximum(u_a, u_b)
        extra += np.where(inside, antiderivative(u1) - antiderivative(u0), 0.0)
    return extra


def mouth_opening(
    positions: np.ndarray,
    moment: np.ndarray,
    centre: float,
    beam: BeamSpec,
    material: MaterialParams,
) -> TrenchOpening:
    """Opening of the groove at ``centre`` under a nodal moment distribution.

    Args:
        positions: Node positions (m), increasing.
        moment: Bending moment at the nodes (N·m, sagging positive).
        centre: Groove centreline (m).
        beam: Supplies the strip width and the groove footprint ``d0``.
        material: Supplies E, the film thickness and the trench depth.
    """
    thickness = material.film_thickness
    remaining = material.remaining_thickness
    half_width = beam.notch_width_d0 / 2
    lever = thickness - remaining / 2
    edges = []
    for lower, upper in ((centre - half_width, centre), (centre, centre + half_width)):
        x = np.linspace(lower, upper, FOOTPRINT_SAMPLES)
        section = remaining + (thickness - remaining) * np.abs(x - centre) / half_width
        inertia = beam.width * section**3 / 12
        curvature = np.interp(x, positions, moment) / (
            material.young_modulus_eff * inertia
        )
        edges.append(lever * float(trapezoid(curvature, x)))
    return TrenchOpening(*edges)


def fd_beam_oracle(
    beam: BeamSpec,
    load_position: float,
    force: float,
    n_nodes: int = 801,
    material: MaterialParams = MaterialParams(),  # noqa: B008
) -> OracleResult:
    """Solve the notched strip by finite differences.

    Args:
        beam: Strip geometry; ``second_moment`` is the un-notched value.
        load_position: Point load position from the left support (m).
        force: Point load (N).
        n_nodes: Grid nodes including both supports.
        material: Supplies E, the film thickness and the trench depth.

    Raises:
        DomainError: when the grid is too coarse to resolve the notches.
        SingularSystemError: when the stiffness matrix is singular.
    """
    if n_nodes < MIN_NODES:
        raise DomainError(f"n_nodes must be at least {MIN_NODES}, got {n_nodes}")
    length = beam.length
    if not 0 < load_position < length:
        raise DomainError(
            f"load position {load_position} m must lie strictly inside (0, {length})"
        )
    if force < 0:
        raise DomainError(f"force must be non-negative, got {force} N")

    positions = np.linspace(0.0, length, n_nodes)
    step = positions[1] - positions[0]
    half_width = beam.notch_width_d0 / 2
    for centre in beam.notch_positions:
        resolved = np.count_nonzero(
            np.abs(positions - centre) <= half_width * (1 + 1e-9)
        )
        if resolved < MIN_NODES_PER_NOTCH:
            raise DomainError(
                f"notch at {centre} m is resolved by {resolved} nodes, "
                f"at least {MIN_NODES_PER_NOTCH} are required"
            )

    lower = np.clip(positions - step / 2, 0.0, length)
    upper = np.clip(positions + step / 2, 0.0, length)
    volume = upper - lower
    flexibility = volume.copy()
    for centre in beam.notch_positions:
        flexibility += _groove_flexibility(
            lower,
            upper,
            centre,
            half_width,
            material.film_thickness,
            material.remaining_thickness,
        )
    plain_rigidity = material.young_modulus_eff * beam.second_moment
    rigidity = plain_rigidity * volume / flexibility

    # Curvature of every node from the interior deflections, ghost nodes mirrored
    operator = sparse.diags(
        [np.ones(n_nodes - 1), -2 * np.ones(n_nodes), np.ones(n_nodes - 1)],
        [-1, 0, 1],
        format="lil",
    )
    operator[0, 1] = 2.0
    operator[n_nodes - 1, n_nodes - 2] = 2.0
    curvature = operator.tocsr()[:, 1 : n_nodes - 1] / step**2
    stiffness = (curvature.T @ sparse.diags(rigidity * volume) @ curvature).tocsc()

    load = np.zeros(n_nodes)
    index = min(int(load_position // step), n_nodes - 2)
    fraction = load_position / step - index
    load[index] += force * (1 - fraction)
    load[index + 1] += force * fraction
    load = load[1 : n_nodes - 1]

    with warnings.catch_warnings():
        warnings.simplefilter("error", MatrixRankWarning)
        try:
            interior = spsolve(stiffness, load)
        except MatrixRankWarning as e:
            raise SingularSystemError(
                f"stiffness matrix of {n_nodes} nodes is singular "
                f"(min nodal rigidity {rigidity.min():.3e} N·m²)"
            ) from e
    if not np.all(np.isfinite(interior)):
        raise SingularSystemError(
            f"finite-difference solution is not finite for {n_nodes} nodes "
            f"(min nodal rigidity {rigidity.min():.3e} N·m²)"
        )

    deflection = np.concatenate(([0.0], interior, [0.0]))
    moment = -rigidity * (curvature @ interior)
    openings = tuple(
        mouth_opening(positions, moment, centre, beam, material)
        for centre in beam.notch_positions
    )
    logger.debug(
        "Oracle solved %s nodes, load %.3e N at %.3e m", n_nodes, force, load_position
    )
    return OracleResult(positions, deflection, moment, openings)


def analytical_opening(
    beam: BeamSpec, young_modulus: float, position: float, force: float
) -> TrenchOpening:
    """Closed-form opening of the notch at ``position`` loaded at that same point.

    The loaded notch sits at the apex of the moment diagram wherever it is
    along the strip, so it takes the central formula split evenly, as in
    ``notch_openings``.
    """
    moment = fixed_fixed_moment(beam, position, force).moment_at(position)
    total = notch_extension_central(moment, beam.width, young_modulus, beam.alpha)
    return TrenchOpening(total / 2, total / 2)


def compare_with_oracle(
    beam: BeamSpec,
    material: MaterialParams,
    forces: Iterable[float],
    locations: Dict[str, float] = DEFAULT_LOCATIONS,  # noqa: B006
    n_nodes: int = 801,
) -> List[OracleComparison]:
    """Load each named notch in turn and compare both models over a force sweep.

    Forces are in newtons. Each location must coincide with a notch.
    """
    rows = []
    for name, position in locations.items():
        distances = np.abs(np.asarray(beam.notch_positions) - position)
        index = int(np.argmin(distances))
        if distances[index] > 1e-9 * beam.length:
            raise DomainError(f"location {name} at {position} m is not on a notch")
        for force in forces:
            analytical = analytical_opening(
                beam, material.young_modulus_eff, position, force
            )
            oracle = fd_beam_oracle(beam, position, force, n_nodes, material)
            rows.append(
                OracleComparison(
                    name, position, force, analytical, oracle.openings[index]
                )
            )
    logger.info("Compared %s loads against the finite-difference oracle", len(rows))
    return rows
