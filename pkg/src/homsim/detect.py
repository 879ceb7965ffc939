"""Non-number-resolving detectors: click probabilities and detection functionals."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .splitter import JointOutputDistribution


@dataclass(frozen=True)
class Detector:
    """Click detector with per-photon efficiency ``eta`` and per-gate dark-click probability.

    A dark click is an independent OR with the photon-induced click.
    """

    eta: float = 1.0
    dark: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.eta <= 1.0):
            raise DomainError(f"detector efficiency must lie in [0, 1], got {self.eta}")
        if not (0.0 <= self.dark < 1.0):
            raise DomainError(f"dark-click probability must lie in [0, 1), got {self.dark}")

    def click(self, n):
        return click_probability(n, self)

    def click_for_mean(self, mean_photons):
        """Click probability for Poissonian light of the given mean photon number."""
        return 1.0 - (1.0 - self.dark) * np.exp(-self.eta * np.asarray(mean_photons, dtype=float))


IDEAL = Detector(1.0, 0.0)


def click_probability(n, det: Detector):
    """``1 - (1 - dark)(1 - eta)^n``; accepts scalars or integer arrays."""
    n_arr = np.asarray(n)
    if np.any(n_arr < 0):
        raise DomainError("photon number must be >= 0")
    p = 1.0 - (1.0 - det.dark) * np.power(1.0 - det.eta, n_arr)
    return float(p) if p.ndim == 0 else p


def coincidence_probability(dist: JointOutputDistribution, d1: Detector, d2: Detector) -> float:
    """Probability that both output detectors click."""
    pc = click_probability(np.arange(dist.probs.shape[0]), d1)
    pd = click_probability(np.arange(dist.probs.shape[1]), d2)
    return float(pc @ dist.probs @ pd)


def single_detector_probability(dist: JointOutputDistribution, d1: Detector) -> float:
    """Probability that the detector on output c clicks, whatever the other one does."""
    pc = click_probability(np.arange(dist.probs.shape[0]), d1)
    return float(pc @ dist.marginal_c())


def second_detector_probability(dist: JointOutputDistribution, d2: Detector) -> float:
    """Same as :func:`single_detector_probability` for the detector on output d."""
    return single_detector_probability(dist.mirrored(), d2)
