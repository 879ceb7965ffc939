"""Two-photon interference of weak laser pulses recalled from atomic-frequency-comb memories."""

__version__ = "0.1.0"

from .errors import (AccuracyError, CapacityError, ConfigError, DomainError, FitError,  # noqa: E402
                     HomsimError, NoSolutionError, StateError)

__all__ = ["__version__", "AccuracyError", "CapacityError", "ConfigError", "DomainError",
           "FitError", "HomsimError", "NoSolutionError", "StateError"]
