"""Exception types shared across the package."""


class CutopError(Exception):
    """Base class for all package errors."""


class ConfigError(CutopError):
    """Invalid configuration or parameters outside their allowed ranges."""


class ShapeError(CutopError):
    """Array dimensions do not match what an operation requires."""


class UsageError(CutopError):
    """An operation was called in a way its contract forbids."""


class NumericError(CutopError):
    """Non-finite values appeared during a numerical computation."""


class StabilityError(ConfigError):
    """A solver setting violates its stability bound."""


class UnsupportedError(CutopError):
    """A physically valid case that this toolkit deliberately does not handle."""


class ExtractionError(CutopError):
    """Discontinuity extraction failed to find the expected structure."""


class NoTransitionError(ExtractionError):
    """No sharp transition exceeds the slope floor."""


class CorruptionError(CutopError):
    """A persisted file is inconsistent with its manifest."""


class FormatVersionError(CorruptionError):
    """A persisted file was written with an unsupported format version."""
