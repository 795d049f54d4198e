"""Exceptions raised by the neural network engine."""

from trenchsense.core.exceptions import DataError, DomainError, NumericError


class CheckpointError(DataError):
    """Raised when a checkpoint cannot be written, read or matched to a model."""


class ModelStateError(DomainError):
    """Raised when a model is used out of order, e.g. backward before forward."""


class TrainingDivergedError(NumericError):
    """Raised when a training loss stops being finite."""
