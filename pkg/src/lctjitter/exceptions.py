"""Exception types raised by the library."""


class LctJitterError(ValueError):
    """Base class for all library errors."""


class ParameterError(LctJitterError):
    """Invalid LCT parameter matrix (not unimodular, or b <= 0)."""


class InputError(LctJitterError):
    """Malformed signal or sample input."""


class ConfigError(LctJitterError):
    """Inconsistent configuration (grid too coarse, jitter too wide, ...)."""


class DomainError(LctJitterError):
    """Evaluation point outside the region supported by the data."""


class BandViolationError(LctJitterError):
    """Spectral mass found outside the declared bandwidth."""
