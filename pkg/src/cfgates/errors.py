class CfgatesError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(CfgatesError):
    """A network, mode or element was wired inconsistently."""


class ParameterError(CfgatesError, ValueError):
    """A numeric parameter is outside its allowed range."""


class UsageError(CfgatesError):
    """An operation was called with arguments that do not fit it."""
