"""Optics specific exceptions."""

from trenchsense.core.exceptions import NumericError


class CalibrationError(NumericError):
    """Raised when the camera response cannot reach a requested brightness."""
