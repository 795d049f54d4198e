"""Evaluation specific exceptions."""

from trenchsense.core.exceptions import NumericError


class DegenerateFitError(NumericError):
    """Raised when calibration pairs cannot determine a stiffness coefficient."""
