"""Exception types shared across the package."""


class ProsotokError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(ProsotokError):
    """Malformed input or a violated data invariant."""


class ConfigError(ValidationError):
    """Invalid configuration values (bounds, frame sizes, ...)."""


class UsageError(ValidationError):
    """Bad command line invocation."""


class InsufficientDataError(ProsotokError):
    """Not enough (distinct) samples to fit the requested number of clusters."""


class DegenerateSpeakerError(ProsotokError):
    """Speaker has fewer than two voiced phones, or zero F0 variance."""


class UnsupportedVersionError(ProsotokError):
    """Model file carries a version this code does not understand."""
