"""Beam-splitter transforms of Fock and phase-averaged coherent inputs.

Convention: ``a+ -> t c+ + i r d+`` and ``b+ -> i r c+ + t d+``. Output
distributions are indexed ``probs[n_c, n_d]`` with both auxiliary modes of a
spatial output summed together.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import convolve2d
from scipy.special import gammaln

from .errors import CapacityError, DomainError
from .photonstat import DEFAULT_POLICY, SourcePulse, TruncationPolicy, as_source

_FLUSH = 1e-300
_LOG_FACT = gammaln(np.arange(2049) + 1.0)
_LOG_FACT.setflags(write=False)
_I_POWERS = np.array([1.0, 1j, -1.0, -1j])


def _log_binom(n, k):
    return _LOG_FACT[n] - _LOG_FACT[k] - _LOG_FACT[n - k]


@dataclass(frozen=True)
class BeamSplitter:
    """Lossless splitter with real reflection and transmission amplitudes."""

    r: float = 1 / math.sqrt(2)
    t: float = 1 / math.sqrt(2)

    def __post_init__(self):
        if not (0.0 <= self.r <= 1.0 and 0.0 <= self.t <= 1.0):
            raise DomainError(f"amplitudes must lie in [0, 1], got r={self.r}, t={self.t}")
        if abs(self.r**2 + self.t**2 - 1.0) > 1e-12:
            raise DomainError(f"r^2 + t^2 must equal 1, got {self.r**2 + self.t**2}")

    @classmethod
    def balanced(cls) -> "BeamSplitter":
        return cls()

    @classmethod
    def from_reflectance(cls, reflectance: float) -> "BeamSplitter":
        if not 0.0 <= reflectance <= 1.0:
            raise DomainError(f"reflectance must lie in [0, 1], got {reflectance}")
        return cls(math.sqrt(reflectance), math.sqrt(1.0 - reflectance))

    @property
    def reflectance(self) -> float:
        return self.r**2

    @property
    def transmittance(self) -> float:
        return self.t**2


def check_overlap(overlap: float) -> float:
    """Validate a mode-overlap magnitude, which must lie in [0, 1]."""
    overlap = float(overlap)
    if not (0.0 <= overlap <= 1.0):
        raise DomainError(f"mode overlap must lie in [0, 1], got {overlap}")
    return overlap


@dataclass(frozen=True)
class JointOutputDistribution:
    """Joint photon-number distribution over the two spatial outputs."""

    probs: np.ndarray
    tail_bound: float = 0.0

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if probs.ndim != 2:
            raise DomainError("probs must be a 2-d array indexed [n_c, n_d]")
        if np.any(probs < 0):
            raise DomainError("probabilities must be nonnegative")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def point(cls, n_c: int, n_d: int) -> "JointOutputDistribution":
        probs = np.zeros((n_c + 1, n_d + 1))
        probs[n_c, n_d] = 1.0
        return cls(probs)

    def __getitem__(self, key) -> float:
        n_c, n_d = key
        if 0 <= n_c < self.probs.shape[0] and 0 <= n_d < self.probs.shape[1]:
            return float(self.probs[n_c, n_d])
        return 0.0

    def total(self) -> float:
        return float(self.probs.sum())

    def marginal_c(self) -> np.ndarray:
        return self.probs.sum(axis=1)

    def marginal_d(self) -> np.ndarray:
        return self.probs.sum(axis=0)

    def mean_c(self) -> float:
        return float(np.dot(np.arange(self.probs.shape[0]), self.marginal_c()))

    def mean_d(self) -> float:
        return float(np.dot(np.arange(self.probs.shape[1]), self.marginal_d()))

    def mirrored(self) -> "JointOutputDistribution":
        return JointOutputDistribution(self.probs.T.copy(), self.tail_bound)

    def support(self):
        """Yield ``(n_c, n_d, p)`` for every nonzero entry."""
        for n_c, n_d in zip(*np.nonzero(self.probs)):
            yield int(n_c), int(n_d), float(self.probs[n_c, n_d])


def _check_counts(n, m):
    for x in (n, m):
        if int(x) != x or x < 0:
            raise DomainError(f"photon numbers must be nonnegative integers, got {x}")
    if n + m >= _LOG_FACT.size:
        raise CapacityError(f"total photon number {n + m} exceeds the coefficient table")
    return int(n), int(m)


def _k_coefficients(n, m, bs, log_binoms):
    """Amplitude ``t^(m-k+j) (ir)^(n-j+k) sqrt(prod binomials)`` on the (j, k) grid."""
    j = np.arange(n + 1)[:, None]
    k = np.arange(m + 1)[None, :]
    t_pow = m - k + j
    r_pow = n - j + k
    mag = np.power(bs.t, t_pow) * np.power(bs.r, r_pow) * np.exp(0.5 * log_binoms(j, k))
    mag = np.where(mag < _FLUSH, 0.0, mag)
    return mag * _I_POWERS[r_pow % 4], j, k


def indistinguishable_amplitudes(n: int, m: int, bs: BeamSplitter) -> np.ndarray:
    """Output amplitudes of ``|n>_a |m>_b`` in a shared auxiliary mode.

    Entry ``s`` is the amplitude of ``|s>_c |n+m-s>_d``; terms with equal
    ``s`` add coherently, which is where two-photon interference comes from.
    """
    n, m = _check_counts(n, m)

    def log_binoms(j, k):
        return (_log_binom(n, j) + _log_binom(m, k)
                + _log_binom(j + k, j) + _log_binom(n + m - j - k, n - j))

    coeff, j, k = _k_coefficients(n, m, bs, log_binoms)
    amps = np.zeros(n + m + 1, dtype=complex)
    np.add.at(amps, np.broadcast_to(j + k, coeff.shape), coeff)
    return amps


def distinguishable_amplitudes(n: int, m: int, bs: BeamSplitter) -> np.ndarray:
    """Amplitudes of ``|j, k>_c |n-j, m-k>_d`` for inputs in orthogonal auxiliary modes.

    Returned as an ``(n+1, m+1)`` array indexed ``[j, k]``: ``j`` photons from
    input a and ``k`` from input b end up in output c.
    """
    n, m = _check_counts(n, m)

    def log_binoms(j, k):
        return _log_binom(n, j) + _log_binom(m, k)

    coeff, _, _ = _k_coefficients(n, m, bs, log_binoms)
    return coeff


def fock_output_indistinguishable(n: int, m: int, bs: BeamSplitter) -> JointOutputDistribution:
    amps = indistinguishable_amplitudes(n, m, bs)
    total = n + m
    probs = np.zeros((total + 1, total + 1))
    s = np.arange(total + 1)
    probs[s, total - s] = np.abs(amps) ** 2
    return JointOutputDistribution(probs)


def fock_output_distinguishable(n: int, m: int, bs: BeamSplitter) -> JointOutputDistribution:
    weights = np.abs(distinguishable_amplitudes(n, m, bs)) ** 2
    total = int(n) + int(m)
    probs = np.zeros((total + 1, total + 1))
    j = np.arange(n + 1)[:, None]
    k = np.arange(m + 1)[None, :]
    n_c = np.broadcast_to(j + k, weights.shape)
    np.add.at(probs, (n_c, total - n_c), weights)
    return JointOutputDistribution(probs)


def _fock_mixture(pmf_a, pmf_b, transform):
    """Incoherent mixture of Fock-input transforms weighted by two PMFs."""
    na, nb = pmf_a.n_max, pmf_b.n_max
    probs = np.zeros((na + nb + 1, na + nb + 1))
    for n in np.flatnonzero(pmf_a.probs):
        for m in np.flatnonzero(pmf_b.probs):
            w = pmf_a.probs[n] * pmf_b.probs[m]
            if w == 0.0:
                continue
            out = transform(int(n), int(m)).probs
            probs[: out.shape[0], : out.shape[1]] += w * out
    tail = 1.0 - (1.0 - pmf_a.tail_bound) * (1.0 - pmf_b.tail_bound)
    return probs, tail


def _check_tail(pmf, policy, label):
    if pmf.tail_bound > policy.epsilon:
        raise CapacityError(
            f"{label}: truncation at hard_cap={policy.hard_cap} leaves tail "
            f"{pmf.tail_bound:.3g} > epsilon={policy.epsilon:g}",
            tail=pmf.tail_bound,
        )


def joint_output(source_a, source_b, overlap: float, bs: BeamSplitter,
                 policy: TruncationPolicy = DEFAULT_POLICY) -> JointOutputDistribution:
    """Joint output distribution for two (possibly Fock) sources with mode overlap ``overlap``.

    Partial overlap splits a coherent input ``b`` into a component of mean
    ``overlap**2 * mu_b`` sharing input a's auxiliary mode and an orthogonal
    component of mean ``(1 - overlap**2) * mu_b``. For Fock inputs the overlap
    must be exactly 0 or 1.
    """
    a, b = as_source(source_a), as_source(source_b)
    lam = check_overlap(overlap)
    if lam in (0.0, 1.0):
        pmf_a, pmf_b = a.pmf(policy), b.pmf(policy)
        _check_tail(pmf_a, policy, "input a")
        _check_tail(pmf_b, policy, "input b")
        if lam == 1.0:
            transform = lambda n, m: fock_output_indistinguishable(n, m, bs)  # noqa: E731
        else:
            transform = lambda n, m: fock_output_distinguishable(n, m, bs)  # noqa: E731
        probs, tail = _fock_mixture(pmf_a, pmf_b, transform)
        return JointOutputDistribution(probs, tail)

    if b.is_fock:
        if a.is_fock:
            raise DomainError("partial mode overlap needs at least one coherent input")
        # input swap mirrors the outputs for this splitter convention
        return joint_output(b, a, lam, bs, policy).mirrored()

    pmf_a = a.pmf(policy)
    pmf_par = SourcePulse.coherent(lam**2 * b.mean_photons).pmf(policy)
    pmf_orth = SourcePulse.coherent((1.0 - lam**2) * b.mean_photons).pmf(policy)
    for pmf, label in ((pmf_a, "input a"), (pmf_par, "input b (parallel part)"),
                       (pmf_orth, "input b (orthogonal part)")):
        _check_tail(pmf, policy, label)

    shared, tail_shared = _fock_mixture(
        pmf_a, pmf_par, lambda n, m: fock_output_indistinguishable(n, m, bs))
    vacuum = SourcePulse.coherent(0.0).pmf(policy)
    orth, tail_orth = _fock_mixture(
        vacuum, pmf_orth, lambda n, m: fock_output_distinguishable(n, m, bs))
    probs = convolve2d(shared, orth)
    tail = 1.0 - (1.0 - tail_shared) * (1.0 - tail_orth)
    return JointOutputDistribution(np.clip(probs, 0.0, None), tail)


def coherent_joint_output(mu_a: float, mu_b: float, overlap: float, bs: BeamSplitter,
                          policy: TruncationPolicy = DEFAULT_POLICY) -> JointOutputDistribution:
    """Output distribution of two phase-averaged coherent pulses."""
    return joint_output(SourcePulse.coherent(mu_a), SourcePulse.coherent(mu_b), overlap, bs, policy)
