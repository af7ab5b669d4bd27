"""Exception types shared across the package."""


class WavepacketError(Exception):
    """Base class for every error raised by this package."""


class DomainError(WavepacketError, ValueError):
    """An argument lies outside the mathematical domain of a function."""


class RegimeError(WavepacketError):
    """Inputs are valid but outside the regime where an approximation holds."""


class ConfigError(WavepacketError):
    """A scan specification or configuration file is malformed."""
