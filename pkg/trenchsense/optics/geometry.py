"""Layout of the 5×5 cross-trench pattern."""

from dataclasses import dataclass

import numpy as np

from trenchsense.core.exceptions import DomainError

GRID_SIZE = 5
DEFAULT_WINDOW_MM = 16.0


@dataclass(frozen=True)
class SensorGeometry:
    """Cross-trench layout in millimetres, origin at the window corner."""

    pitch: float = 2.0
    cross_arm: float = 1.5
    kerf: float = 0.2
    window: float = DEFAULT_WINDOW_MM

    def __post_init__(self):
        """Validate the layout."""
        if not (self.pitch > 0 and self.cross_arm > 0 and self.kerf > 0):
            raise DomainError("pitch, cross_arm and kerf must be strictly positive")
        if self.pitch * (GRID_SIZE - 1) + self.cross_arm > self.window:
            raise DomainError("the cross pattern does not fit inside the window")
        if self.kerf >= self.cross_arm:
            raise DomainError("kerf must be narrower than cross_arm")

    @classmethod
    def from_config(cls, section) -> "SensorGeometry":
        """Build from the ``geometry`` section of a run configuration."""
        return cls(
            pitch=section.pitch,
            cross_arm=section.cross_arm,
            kerf=section.kerf,
            window=section.window,
        )

    @property
    def origin(self) -> float:
        """Position of cross (1, 1) along both axes."""
        return (self.window - self.pitch * (GRID_SIZE - 1)) / 2

    def grid_to_mm(self, index: float) -> float:
        """Convert a (possibly half) grid index into a window coordinate."""
        return self.origin + (index - 1) * self.pitch

    def cross_positions(self) -> np.ndarray:
        """Rest positions of the five cross columns (or rows), in mm."""
        return self.origin + self.pitch * np.arange(GRID_SIZE)

    def contains(self, x_mm: float, y_mm: float) -> bool:
        """Tell whether a point lies strictly inside the window."""
        return 0 < x_mm < self.window and 0 < y_mm < self.window
