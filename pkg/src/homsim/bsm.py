"""psi-minus Bell-state measurement on time-bin qubits.

A projection onto psi-minus is registered when one detector clicks in the
early time bin and the other in the late one. Closed forms hold for weak
inputs; :func:`psi_minus_probability_exact` enumerates Fock states in the
four output modes (c early, c late, d early, d late) instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .detect import IDEAL, Detector, click_probability
from .errors import CapacityError, DomainError, NoSolutionError
from .photonstat import DEFAULT_POLICY, TruncationPolicy, as_source
from .splitter import BeamSplitter
from .synth import FitResult, fit_arrays

EARLY_LATE = "early_late"
PLUS_MINUS = "plus_minus"
ATTENUATED = "attenuated"
SINGLE_PHOTON = "single_photon"

CLASSICAL_FIDELITY = 2.0 / 3.0


@dataclass(frozen=True)
class TimeBinQubit:
    """``cos(theta/2)|e> + exp(i phi) sin(theta/2)|l>``."""

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi:
            raise DomainError(f"theta must lie in [0, pi], got {self.theta}")
        if not 0.0 <= self.phi < 2.0 * math.pi:
            raise DomainError(f"phi must lie in [0, 2pi), got {self.phi}")

    @classmethod
    def make(cls, theta: float, phi: float = 0.0) -> "TimeBinQubit":
        """Construct with ``phi`` wrapped into [0, 2pi)."""
        return cls(theta, phi % (2.0 * math.pi))

    def amplitudes(self) -> tuple[complex, complex]:
        return (math.cos(self.theta / 2.0),
                complex(math.sin(self.theta / 2.0)) * np.exp(1j * self.phi))

    def orthogonal(self) -> "TimeBinQubit":
        return TimeBinQubit.make(math.pi - self.theta, self.phi + math.pi)


EARLY = TimeBinQubit(0.0)
LATE = TimeBinQubit(math.pi)
PLUS = TimeBinQubit(math.pi / 2)
MINUS = TimeBinQubit(math.pi / 2, math.pi)


@dataclass(frozen=True)
class MemoryChannel:
    """Stored qubit comes back unchanged with probability F, flipped to its orthogonal state otherwise."""

    fidelity: float

    def __post_init__(self):
        if not 0.5 <= self.fidelity <= 1.0:
            raise DomainError(f"fidelity must lie in [0.5, 1], got {self.fidelity}")


@dataclass(frozen=True)
class BsmResult:
    p_parallel: float
    p_orthogonal: float
    error_rate: float
    visibility: float

    @classmethod
    def from_probabilities(cls, p_parallel: float, p_orthogonal: float) -> "BsmResult":
        e = error_rate(p_parallel, p_orthogonal)
        vis = (p_orthogonal - p_parallel) / p_orthogonal if p_orthogonal else float("nan")
        return cls(float(p_parallel), float(p_orthogonal), e, float(vis))


def psi_minus_probability_attenuated(qa: TimeBinQubit, qb: TimeBinQubit, mu: float) -> float:
    """Weak-pulse projection probability for equal mean photon numbers ``mu``."""
    if not (math.isfinite(mu) and mu >= 0):
        raise DomainError(f"mu must be finite and >= 0, got {mu}")
    sa, sb = math.sin(qa.theta), math.sin(qb.theta)
    bracket = (4.0 * math.sin((qa.theta + qb.theta) / 2.0) ** 2 + sa**2 + sb**2
               - 2.0 * sa * sb * (1.0 + math.cos(qa.phi - qb.phi)))
    return mu**2 * math.exp(-2.0 * mu) / 8.0 * bracket


def psi_minus_probability_single_photon(qa: TimeBinQubit, qb: TimeBinQubit) -> float:
    """Projection probability for one photon in each input."""
    return 0.25 * (math.sin((qa.theta + qb.theta) / 2.0) ** 2
                   + math.sin((qa.theta - qb.theta) / 2.0) ** 2
                   - math.sin(qa.theta) * math.sin(qb.theta) * math.cos(qa.phi - qb.phi))


def _mode_vectors(qa: TimeBinQubit, qb: TimeBinQubit, bs: BeamSplitter):
    """Creation-operator images over the output modes (ce, cl, de, dl)."""
    ea, la = qa.amplitudes()
    eb, lb = qb.amplitudes()
    vec_a = np.array([bs.t * ea, bs.t * la, 1j * bs.r * ea, 1j * bs.r * la], dtype=complex)
    vec_b = np.array([1j * bs.r * eb, 1j * bs.r * lb, bs.t * eb, bs.t * lb], dtype=complex)
    return vec_a, vec_b


def _times_linear(poly, vec):
    """Multiply a 4-variable polynomial (dense coefficient array) by ``sum_x vec[x] * z_x``."""
    out = np.zeros_like(poly)
    out[1:, :, :, :] += vec[0] * poly[:-1, :, :, :]
    out[:, 1:, :, :] += vec[1] * poly[:, :-1, :, :]
    out[:, :, 1:, :] += vec[2] * poly[:, :, :-1, :]
    out[:, :, :, 1:] += vec[3] * poly[:, :, :, :-1]
    return out


def _event_weights(size: int, d1: Detector, d2: Detector):
    """``prod(k!) * P(psi-minus event | k)`` on the output Fock grid."""
    k = np.arange(size)
    c1 = click_probability(k, d1)
    c2 = click_probability(k, d2)
    ce, cl, de, dl = np.ix_(c1, c1, c2, c2)
    first = ce * dl
    second = cl * de
    event = first + second - first * second
    log_fact = gammaln(k + 1.0)
    lf = np.exp(log_fact)
    fact = lf[:, None, None, None] * lf[None, :, None, None] * lf[None, None, :, None] * lf[None, None, None, :]
    return event * fact


def psi_minus_probability_exact(qa: TimeBinQubit, qb: TimeBinQubit, source_a=None, source_b=None,
                                d1: Detector = IDEAL, d2: Detector = IDEAL,
                                policy: TruncationPolicy = DEFAULT_POLICY,
                                bs: BeamSplitter = BeamSplitter(), mu: float | None = None) -> float:
    """Probability of a psi-minus detection event by truncated Fock enumeration.

    Sources are :class:`SourcePulse` values or mean photon numbers; ``mu``
    sets both to coherent pulses of that mean. The relative optical phase of
    the two inputs is averaged, so photon-number sectors add incoherently.
    """
    if mu is not None:
        source_a = source_b = mu
    a, b = as_source(source_a), as_source(source_b)
    pmf_a, pmf_b = a.pmf(policy), b.pmf(policy)
    for pmf, label in ((pmf_a, "input a"), (pmf_b, "input b")):
        if pmf.tail_bound > policy.epsilon:
            raise CapacityError(f"{label}: tail {pmf.tail_bound:.3g} exceeds epsilon", tail=pmf.tail_bound)
    degree = pmf_a.n_max + pmf_b.n_max
    if degree > policy.hard_cap:
        raise CapacityError(f"total photon number {degree} exceeds hard_cap={policy.hard_cap}")

    size = degree + 1
    weights = _event_weights(size, d1, d2)
    vec_a, vec_b = _mode_vectors(qa, qb, bs)
    log_fact = gammaln(np.arange(size) + 1.0)

    poly_a = np.zeros((size,) * 4, dtype=complex)
    poly_a[0, 0, 0, 0] = 1.0
    total = 0.0
    for n in range(pmf_a.n_max + 1):
        if n:
            poly_a = _times_linear(poly_a, vec_a)
        if pmf_a.probs[n] == 0.0:
            continue
        poly = poly_a
        for m in range(pmf_b.n_max + 1):
            if m:
                poly = _times_linear(poly, vec_b)
            w = pmf_a.probs[n] * pmf_b.probs[m]
            if w == 0.0:
                continue
            norm = math.exp(-log_fact[n] - log_fact[m])
            total += w * norm * float(np.sum(np.abs(poly) ** 2 * weights))
    return total


def error_rate(p_parallel: float, p_orthogonal: float) -> float:
    """Fraction of psi-minus projections that come from parallel inputs."""
    if p_parallel < 0 or p_orthogonal < 0:
        raise DomainError("projection probabilities must be >= 0")
    if p_parallel + p_orthogonal == 0:
        raise DomainError("error rate is undefined when both probabilities vanish")
    return p_parallel / (p_parallel + p_orthogonal)


def apply_memory_channel(p_parallel: float, p_orthogonal: float, channel: MemoryChannel) -> float:
    """Error rate when one of the two qubits passed through ``channel``."""
    error_rate(p_parallel, p_orthogonal)
    f = channel.fidelity
    return (f * p_parallel + (1.0 - f) * p_orthogonal) / (p_parallel + p_orthogonal)


def fidelity_from_error(e: float, basis: str = EARLY_LATE, source: str = ATTENUATED) -> float:
    """Memory fidelity implied by a measured error rate, attributing all errors to storage."""
    if basis not in (EARLY_LATE, PLUS_MINUS):
        raise DomainError(f"unknown basis {basis!r}")
    if source not in (ATTENUATED, SINGLE_PHOTON):
        raise DomainError(f"unknown source {source!r}")
    if basis == PLUS_MINUS and source == ATTENUATED:
        fidelity = (3.0 - 4.0 * e) / 2.0
    else:
        fidelity = 1.0 - e
    if not 0.5 <= fidelity <= 1.0:
        raise NoSolutionError(
            f"error rate {e:g} implies fidelity {fidelity:g}, outside [0.5, 1] "
            f"for the {basis} basis with {source} qubits")
    return fidelity


def basis_probabilities(basis: str, source: str = ATTENUATED, mu: float = 1.0) -> tuple[float, float]:
    """Closed-form (parallel, orthogonal) projection probabilities, averaged over the basis pair."""
    if basis == EARLY_LATE:
        pairs_par, pairs_orth = [(EARLY, EARLY), (LATE, LATE)], [(EARLY, LATE), (LATE, EARLY)]
    elif basis == PLUS_MINUS:
        pairs_par, pairs_orth = [(PLUS, PLUS), (MINUS, MINUS)], [(PLUS, MINUS), (MINUS, PLUS)]
    else:
        raise DomainError(f"unknown basis {basis!r}")
    if source == ATTENUATED:
        prob = lambda qa, qb: psi_minus_probability_attenuated(qa, qb, mu)  # noqa: E731
    elif source == SINGLE_PHOTON:
        prob = psi_minus_probability_single_photon
    else:
        raise DomainError(f"unknown source {source!r}")
    p_par = sum(prob(*pair) for pair in pairs_par) / 2.0
    p_orth = sum(prob(*pair) for pair in pairs_orth) / 2.0
    return p_par, p_orth


def classical_quantum_bounds() -> dict[str, float]:
    """Error-rate bounds for one qubit stored in an ideal quantum or optimal classical memory."""
    quantum = MemoryChannel(1.0)
    classical = MemoryChannel(CLASSICAL_FIDELITY)
    el = basis_probabilities(EARLY_LATE, ATTENUATED)
    pm = basis_probabilities(PLUS_MINUS, ATTENUATED)
    sp = basis_probabilities(PLUS_MINUS, SINGLE_PHOTON)
    return {
        "F_CM": CLASSICAL_FIDELITY,
        "F_QM": 1.0,
        "e_el_att_QM": apply_memory_channel(*el, quantum),
        "e_el_att_CM": apply_memory_channel(*el, classical),
        "e_pm_att_QM": apply_memory_channel(*pm, quantum),
        "e_pm_att_CM": apply_memory_channel(*pm, classical),
        "e_sing_QM": apply_memory_channel(*sp, quantum),
        "e_sing_CM": apply_memory_channel(*sp, classical),
    }


def error_rate_from_visibility(visibility: float) -> float:
    return (1.0 - visibility) / (2.0 - visibility)


@dataclass
class PhaseScan:
    phases: np.ndarray
    values: np.ndarray
    fit: FitResult
    visibility: float
    error_rate: float
    trials: int | None = None


def bsm_phase_scan(mu: float, phases, trials: int | None = None, seed: int | None = None) -> PhaseScan:
    """Projection rate versus relative qubit phase for equal-superposition qubits, with a cosine fit.

    Without ``trials`` the closed-form probabilities are fitted directly;
    with ``trials`` binomial counts per phase are drawn and fitted instead.
    """
    phases = np.asarray(phases, dtype=float)
    if phases.size == 0:
        raise DomainError("phase grid is empty")
    probs = np.array([psi_minus_probability_attenuated(PLUS, TimeBinQubit.make(math.pi / 2, -d), mu)
                      for d in phases])
    if trials is None:
        values = probs
        fit = fit_arrays(phases, values, "cosine")
    else:
        if int(trials) != trials or trials < 1:
            raise DomainError(f"trials must be a positive integer, got {trials}")
        rng = np.random.default_rng(np.random.SeedSequence(seed))
        values = rng.binomial(int(trials), np.clip(probs, 0.0, 1.0)).astype(float)
        fit = fit_arrays(phases, values, "cosine", sigma=np.sqrt(np.maximum(values, 1.0)))
    return PhaseScan(phases, values, fit, fit.visibility,
                     error_rate_from_visibility(fit.visibility), trials)
