"""Base exceptions shared by every trenchsense subpackage."""


class TrenchsenseError(Exception):
    """Base class of all library errors."""

    exit_code = 2


class ConfigError(TrenchsenseError):
    """Raised when a configuration file or flag is invalid."""

    exit_code = 1


class DomainError(TrenchsenseError, ValueError):
    """Raised when a physical or geometric input is outside its domain."""

    exit_code = 2


class DataError(TrenchsenseError):
    """Raised when an input file is missing or corrupt or cannot be written."""

    exit_code = 2


class NumericError(TrenchsenseError, ArithmeticError):
    """Raised when a numerical procedure fails (singular system, divergence)."""

    exit_code = 3
