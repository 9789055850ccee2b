"""Exception hierarchy shared by all modules.

The CLI maps these onto exit statuses, so keep the base classes stable.
"""


class HubbardEntError(Exception):
    """Base class for every error raised by this package."""


class DomainError(HubbardEntError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ValidationError(HubbardEntError, ValueError):
    """A data record violates one of its invariants."""


class ConfigurationError(HubbardEntError, ValueError):
    """A lattice/scan/ensemble configuration is inconsistent."""


class ConvergenceError(HubbardEntError, RuntimeError):
    """An iterative method stopped before reaching its tolerance."""

    def __init__(self, message: str, achieved: float | None = None):
        super().__init__(message)
        self.achieved = achieved


class ResourceError(HubbardEntError, RuntimeError):
    """A problem is too large for the configured resource caps."""


class DensitySourceError(HubbardEntError, RuntimeError):
    """A density source failed to deliver a profile."""
