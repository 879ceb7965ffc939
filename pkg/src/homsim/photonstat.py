"""Photon-number distributions for phase-averaged coherent states and Fock states."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import CapacityError, DomainError

COHERENT = "phase_averaged_coherent"
FOCK = "fock"


@dataclass(frozen=True)
class TruncationPolicy:
    """Where to cut photon-number sums.

    A distribution is truncated at the smallest photon number whose omitted
    tail mass is below ``epsilon``, but never beyond ``hard_cap``.
    """

    epsilon: float = 1e-12
    hard_cap: int = 64

    def __post_init__(self):
        if not (0.0 < self.epsilon < 1.0):
            raise DomainError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if int(self.hard_cap) != self.hard_cap or self.hard_cap < 1:
            raise DomainError(f"hard_cap must be an integer >= 1, got {self.hard_cap}")


DEFAULT_POLICY = TruncationPolicy()


@dataclass(frozen=True)
class PhotonNumberPMF:
    """Truncated probability mass function over photon number ``n = 0..n_max``.

    ``tail_bound`` is the probability mass beyond ``n_max`` that was dropped.
    """

    probs: np.ndarray
    tail_bound: float = 0.0

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if probs.ndim != 1 or probs.size == 0:
            raise DomainError("probs must be a non-empty 1-d sequence")
        if np.any(probs < 0):
            raise DomainError("probabilities must be nonnegative")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @property
    def n_max(self) -> int:
        return self.probs.size - 1

    def mean(self) -> float:
        return float(np.dot(np.arange(self.probs.size), self.probs))

    def __len__(self):
        return self.probs.size


def poisson_pmf(mu: float, policy: TruncationPolicy = DEFAULT_POLICY) -> PhotonNumberPMF:
    """Poisson photon statistics of a phase-averaged coherent state with mean ``mu``.

    The cutoff is the smallest ``N`` with ``P(n > N) < policy.epsilon``. If that
    would exceed ``policy.hard_cap`` the distribution stops at the cap and the
    larger tail is reported in ``tail_bound``.
    """
    mu = float(mu)
    if not math.isfinite(mu) or mu < 0:
        raise DomainError(f"mean photon number must be finite and >= 0, got {mu}")
    if mu == 0.0:
        return PhotonNumberPMF(np.array([1.0]), 0.0)

    ns = np.arange(policy.hard_cap + 1)
    # sf is the regularised incomplete gamma, so small tails keep full relative precision
    tails = stats.poisson.sf(ns, mu)
    below = np.flatnonzero(tails < policy.epsilon)
    n_max = int(below[0]) if below.size else policy.hard_cap
    probs = stats.poisson.pmf(ns[: n_max + 1], mu)
    return PhotonNumberPMF(probs, float(tails[n_max]))


def fock_pmf(n: int, policy: TruncationPolicy = DEFAULT_POLICY) -> PhotonNumberPMF:
    """Point mass at photon number ``n``."""
    if int(n) != n or n < 0:
        raise DomainError(f"Fock photon number must be a nonnegative integer, got {n}")
    n = int(n)
    if n > policy.hard_cap:
        raise CapacityError(f"Fock state |{n}> exceeds hard_cap={policy.hard_cap}")
    probs = np.zeros(n + 1)
    probs[n] = 1.0
    return PhotonNumberPMF(probs, 0.0)


@dataclass(frozen=True)
class SourcePulse:
    """Photon statistics of one input pulse.

    Only the mean photon number is kept for coherent pulses: the optical
    phase is uniformly random, which makes the state a Poisson mixture of
    Fock states.
    """

    mean_photons: float
    kind: str = COHERENT

    def __post_init__(self):
        mu = float(self.mean_photons)
        if not math.isfinite(mu) or mu < 0:
            raise DomainError(f"mean_photons must be finite and >= 0, got {mu}")
        if self.kind not in (COHERENT, FOCK):
            raise DomainError(f"unknown source kind {self.kind!r}")
        if self.kind == FOCK and mu != int(mu):
            raise DomainError(f"a Fock source needs an integer photon number, got {mu}")

    @classmethod
    def coherent(cls, mu: float) -> "SourcePulse":
        return cls(float(mu), COHERENT)

    @classmethod
    def fock(cls, n: int) -> "SourcePulse":
        return cls(float(n), FOCK)

    @property
    def is_fock(self) -> bool:
        return self.kind == FOCK

    def pmf(self, policy: TruncationPolicy = DEFAULT_POLICY) -> PhotonNumberPMF:
        if self.is_fock:
            return fock_pmf(int(self.mean_photons), policy)
        return poisson_pmf(self.mean_photons, policy)


def as_source(source) -> SourcePulse:
    """Accept a bare number as a coherent source."""
    if isinstance(source, SourcePulse):
        return source
    return SourcePulse.coherent(source)
