"""Linear force-displacement relation of the film at a contact point."""

from trenchsense.core.exceptions import DomainError

# Calibrated stiffness at the central cross, in mN/mm
DEFAULT_STIFFNESS_K = 85.4


def force_from_displacement(z: float, k: float = DEFAULT_STIFFNESS_K) -> float:
    """Return the contact force F = k·z.

    Args:
        z: Vertical displacement of the probe, in mm.
        k: Stiffness coefficient, in mN/mm. Zero yields a zero force.

    Returns:
        The force in mN.
    """
    if z < 0:
        raise DomainError(f"displacement must be non-negative, got {z} mm")
    if k < 0:
        raise DomainError(f"stiffness must be non-negative, got {k} mN/mm")
    return k * z


def displacement_from_force(force: float, k: float = DEFAULT_STIFFNESS_K) -> float:
    """Return the displacement z = F/k (mm) for a force in mN."""
    if force < 0:
        raise DomainError(f"force must be non-negative, got {force} mN")
    if not k > 0:
        raise DomainError(f"stiffness must be strictly positive, got {k} mN/mm")
    return force / k
