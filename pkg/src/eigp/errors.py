"""Exception types shared across the package."""


class EigpError(Exception):
    """Base class for all package errors."""


class InvalidInputError(EigpError, ValueError):
    """A caller-supplied value violates an operation's preconditions."""


class InternalConsistencyError(EigpError, RuntimeError):
    """A cached quantity disagrees with the data it was derived from."""


class ConfigError(EigpError, ValueError):
    """An experiment configuration is malformed or out of range."""


class DatasetError(EigpError, ValueError):
    """A dataset file cannot be parsed into a valid stream."""


class MetricError(EigpError, ValueError):
    """A metric is undefined for the given inputs (e.g. zero target variance)."""


class ComparisonError(EigpError, ValueError):
    """Run artifacts cannot be compared (mismatched scenarios or seeds)."""
