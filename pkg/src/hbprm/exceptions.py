"""Exception hierarchy."""


class HBPRMError(Exception):
    """Base class for all package errors."""


class ConfigError(HBPRMError, ValueError):
    """Invalid configuration, shapes or arguments."""


class DataError(HBPRMError, ValueError):
    """A dataset violates an ingestion invariant."""


class DomainError(HBPRMError, ValueError):
    """A special-function or distribution argument is outside its domain."""


class UndefinedMetricWarning(RuntimeWarning):
    """A diagnostic is undefined for its input and was reported as NaN."""
