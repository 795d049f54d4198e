"""Force calibration: fitting F = k·z at contact points."""

import logging
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from trenchsense.core.exceptions import DomainError
from trenchsense.core.utils import child_rng
from trenchsense.evaluation.exceptions import DegenerateFitError
from trenchsense.mechanics.stiffness import DEFAULT_STIFFNESS_K
from trenchsense.optics.geometry import GRID_SIZE, SensorGeometry

logger = logging.getLogger(__name__)

# Displacements of the calibration protocol, in mm
CALIBRATION_LEVELS = (0.5, 1.0, 1.5, 1.75)
# Relative force noise reproducing R² ≈ 0.9944 at the central point
DEFAULT_FORCE_NOISE = 0.028
# One point per symmetry class of the 5×5 grid
UNIQUE_POINTS = ((1, 1), (2, 1), (2, 2), (3, 1), (3, 2), (3, 3))

Pair = Tuple[float, float]


@dataclass(frozen=True)
class CalibrationRecord:
    """Fitted stiffness of one contact point.

    ``pairs`` are (z mm, F mN); ``k`` is in mN/mm. ``r_squared`` compares the
    through-origin fit with the mean-force baseline.
    """

    point: Tuple[float, float]
    pairs: Tuple[Pair, ...]
    k: float
    r_squared: float


def fit_k(
    pairs: Sequence[Pair], point: Tuple[float, float] = (3, 3)
) -> CalibrationRecord:
    """Least-squares fit of F = k·z through the origin.

    Raises:
        DegenerateFitError: with fewer than two pairs, all displacements at
            zero, constant forces or a non-positive slope.
    """
    data = np.asarray(pairs, dtype=np.float64).reshape(-1, 2)
    if len(data) < 2:
        raise DegenerateFitError(f"at least 2 pairs are needed, got {len(data)}")
    z, force = data[:, 0], data[:, 1]
    z_energy = float(np.dot(z, z))
    if z_energy == 0:
        raise DegenerateFitError("every displacement is zero, k is undetermined")
    k = float(np.dot(z, force) / z_energy)
    if not k > 0:
        raise DegenerateFitError(f"fitted stiffness {k} mN/mm is not positive")

    ss_res = float(np.sum((force - k * z) ** 2))
    ss_tot = float(np.sum((force - force.mean()) ** 2))
    if ss_tot == 0:
        raise DegenerateFitError("forces do not vary, R² is undefined")
    r_squared = 1.0 - ss_res / ss_tot
    return CalibrationRecord(
        point=(float(point[0]), float(point[1])),
        pairs=tuple((float(a), float(b)) for a, b in data),
        k=k,
        r_squared=r_squared,
    )


def synthetic_force_pairs(
    k: float = DEFAULT_STIFFNESS_K,
    z_levels: Sequence[float] = CALIBRATION_LEVELS,
    repeats: int = 10,
    noise: float = DEFAULT_FORCE_NOISE,
    seed: int = 0,
) -> List[Pair]:
    """Force readings k·z·(1 + noise·ε) with ε standard normal, per level."""
    if repeats < 1:
        raise DomainError("repeats must be at least 1")
    if noise < 0:
        raise DomainError("noise must be non-negative")
    rng = np.random.default_rng(seed)
    levels = np.repeat(np.asarray(z_levels, dtype=np.float64), repeats)
    forces = k * levels * (1.0 + noise * rng.standard_normal(levels.size))
    return list(zip(levels.tolist(), forces.tolist(), strict=True))


def point_stiffness(
    geometry: SensorGeometry, point: Tuple[float, float], k_center: float
) -> float:
    """Stiffness at a grid point relative to the central one.

    The row and the column through the point act as parallel clamped strips
    whose point-load compliance scales as (a·b)³, with a and b the distances
    to both supports.
    """

    def compliance(index: float) -> float:
        a = geometry.grid_to_mm(index)
        return (a * (geometry.window - a)) ** 3

    def combined(x: float, y: float) -> float:
        return 1.0 / (1.0 / compliance(x) + 1.0 / compliance(y))

    centre = (GRID_SIZE + 1) / 2
    return k_center * combined(centre, centre) / combined(*point)


def mirror_points(point: Tuple[int, int]) -> List[Tuple[int, int]]:
    """Every grid point equivalent to ``point`` under the square's symmetries."""
    last = GRID_SIZE + 1
    x, y = point
    images = set()
    for a, b in ((x, y), (y, x)):
        for u in (a, last - a):
            for v in (b, last - b):
                images.add((u, v))
    return sorted(images)


def calibrate_grid(
    geometry: SensorGeometry,
    k_center: float = DEFAULT_STIFFNESS_K,
    z_levels: Sequence[float] = CALIBRATION_LEVELS,
    repeats: int = 10,
    noise: float = DEFAULT_FORCE_NOISE,
    seed: int = 0,
) -> Dict[Tuple[int, int], CalibrationRecord]:
    """Fit k on synthetic pairs at the symmetry-unique points, mirrored to all 25.

    Mirrored points share the record of their class, with their own ``point``.
    """
    records: Dict[Tuple[int, int], CalibrationRecord] = {}
    for index, point in enumerate(UNIQUE_POINTS):
        true_k = point_stiffness(geometry, point, k_center)
        pairs = synthetic_force_pairs(
            true_k,
            z_levels,
            repeats,
            noise,
            seed=int(child_rng(seed, index).integers(2**31)),
        )
        record = fit_k(pairs, point)
        logger.info(
            "Point %s: k = %.2f mN/mm (true %.2f), R² = %.4f",
            point,
            record.k,
            true_k,
            record.r_squared,
        )
        for image in mirror_points(point):
            records[image] = CalibrationRecord(
                (float(image[0]), float(image[1])),
                record.pairs,
                record.k,
                record.r_squared,
            )
    return dict(sorted(records.items()))
