"""Exception hierarchy shared by the simulator modules."""


class HomsimError(Exception):
    """Base class for all simulator errors."""


class DomainError(HomsimError, ValueError):
    """An argument lies outside the domain of the operation."""


class CapacityError(HomsimError):
    """A truncated state space is too small for the requested accuracy."""

    def __init__(self, message, tail=None):
        super().__init__(message)
        self.tail = tail


class AccuracyError(HomsimError):
    """A numerical grid or quadrature could not reach its target accuracy."""


class StateError(HomsimError):
    """An operation was called on an object in the wrong state."""


class NoSolutionError(HomsimError, ValueError):
    """An inversion has no solution for the given input."""


class FitError(HomsimError):
    """Least-squares fitting failed to converge."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ConfigError(HomsimError):
    """An experiment configuration failed to parse or validate."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
