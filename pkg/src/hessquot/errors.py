"""Exception hierarchy shared by the library and the CLI."""


class HessQuotError(Exception):
    """Base class for all package errors."""


class DomainError(HessQuotError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class ConeViolationError(DomainError):
    """A point left the admissible cone.

    ``margin`` is the smallest tested elementary symmetric value, so a line
    search can tell how far outside the cone the trial point is.
    """

    def __init__(self, message, margin=None):
        super().__init__(message)
        self.margin = margin


class ConfigError(HessQuotError, ValueError):
    pass


class SamplingError(HessQuotError, RuntimeError):
    pass


class SubsolutionError(HessQuotError, RuntimeError):
    pass


class StageFailure(HessQuotError, RuntimeError):
    """A Newton stage stopped before reaching its tolerance."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
