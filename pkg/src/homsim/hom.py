"""Hong-Ou-Mandel interference of phase-averaged coherent pulses and Fock states.

Two independent routes compute coincidence probabilities:

* the Fock route mixes beam-splitter transforms of number states
  (:func:`homsim.splitter.joint_output`) and applies click detectors;
* the phase-averaged route treats each input as a coherent state with a
  random relative phase, so each output is Poissonian for fixed phase, and
  integrates the click probabilities over that phase.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .detect import IDEAL, Detector, coincidence_probability, second_detector_probability, \
    single_detector_probability
from .errors import AccuracyError, DomainError, NoSolutionError
from .photonstat import DEFAULT_POLICY, TruncationPolicy
from .splitter import BeamSplitter, check_overlap, joint_output

FWHM_PER_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))
# intensity-FWHM time-bandwidth product of a Fourier-limited Gaussian
TIME_BANDWIDTH = 2.0 * math.log(2.0) / math.pi

OVERLAP_SAMPLES = 2**10
OVERLAP_HALF_WIDTH = 6.0  # in units of the widest intensity sigma
QUAD_TOL = 1e-11
QUAD_MAX_NODES = 2**20


@dataclass(frozen=True)
class GaussianPulse:
    """Fourier-limited Gaussian pulse.

    Attributes:
        duration_fwhm: intensity full width at half maximum, seconds.
        carrier_offset: carrier detuning from a common reference, Hz.
        arrival_time: arrival of the intensity peak, seconds.
        polarization_angle: linear polarization angle, radians.
    """

    duration_fwhm: float
    carrier_offset: float = 0.0
    arrival_time: float = 0.0
    polarization_angle: float = 0.0

    def __post_init__(self):
        if not (self.duration_fwhm > 0 and math.isfinite(self.duration_fwhm)):
            raise DomainError(f"duration_fwhm must be positive, got {self.duration_fwhm}")

    @property
    def sigma(self) -> float:
        """Standard deviation of the intensity envelope."""
        return self.duration_fwhm / FWHM_PER_SIGMA

    @property
    def bandwidth_fwhm(self) -> float:
        """Intensity-spectrum FWHM in Hz."""
        return TIME_BANDWIDTH / self.duration_fwhm

    def replace(self, **changes) -> "GaussianPulse":
        return replace(self, **changes)


@dataclass(frozen=True)
class HomResult:
    p_parallel: float
    p_orthogonal: float
    visibility: float

    @classmethod
    def from_probabilities(cls, p_parallel: float, p_orthogonal: float) -> "HomResult":
        if p_orthogonal == 0.0:
            vis = float("nan")
        else:
            vis = (p_orthogonal - p_parallel) / p_orthogonal
        return cls(float(p_parallel), float(p_orthogonal), float(vis))


def gaussian_overlap_closed_form(p1: GaussianPulse, p2: GaussianPulse) -> float:
    """Analytic overlap magnitude of two Gaussian pulses, polarization included."""
    s1, s2 = p1.sigma, p2.sigma
    ssum = s1**2 + s2**2
    dt = p2.arrival_time - p1.arrival_time
    omega = 2.0 * math.pi * (p2.carrier_offset - p1.carrier_offset)
    width = math.sqrt(2.0 * s1 * s2 / ssum)
    temporal = math.exp(-dt**2 / (4.0 * ssum))
    spectral = math.exp(-(omega**2) * s1**2 * s2**2 / ssum)
    pol = abs(math.cos(p2.polarization_angle - p1.polarization_angle))
    return pol * width * temporal * spectral


def _envelope(t, pulse: GaussianPulse, detuning: float):
    return np.exp(-((t - pulse.arrival_time) ** 2) / (4.0 * pulse.sigma**2)
                  - 2j * math.pi * detuning * t)


def mode_overlap(p1: GaussianPulse, p2: GaussianPulse, samples: int = OVERLAP_SAMPLES) -> float:
    """Magnitude of the normalized inner product of two pulse wavefunctions.

    The temporal part is integrated on a uniform grid spanning both pulses
    out to six intensity sigmas.
    """
    pol = abs(math.cos(p2.polarization_angle - p1.polarization_angle))
    if pol < 1e-15:
        return 0.0
    smax = max(p1.sigma, p2.sigma)
    lo = min(p1.arrival_time, p2.arrival_time) - OVERLAP_HALF_WIDTH * smax
    hi = max(p1.arrival_time, p2.arrival_time) + OVERLAP_HALF_WIDTH * smax
    t, step = np.linspace(lo, hi, samples, retstep=True)
    min_fwhm = min(p1.duration_fwhm, p2.duration_fwhm)
    if step > min_fwhm / 50.0:
        raise AccuracyError(
            f"time step {step:.3g} s exceeds duration_fwhm/50 = {min_fwhm / 50:.3g} s; "
            f"the pulses are too far apart for {samples} samples")
    detuning = p2.carrier_offset - p1.carrier_offset
    if abs(detuning) * step > 0.05:
        raise AccuracyError(
            f"detuning {detuning:.3g} Hz is not resolved by a {step:.3g} s grid")
    e1 = _envelope(t, p1, 0.0)
    e2 = _envelope(t, p2, detuning)
    inner = np.trapezoid(np.conj(e1) * e2, t)
    norm = math.sqrt(np.trapezoid(np.abs(e1) ** 2, t) * np.trapezoid(np.abs(e2) ** 2, t))
    return float(min(1.0, pol * abs(inner) / norm))


def overlap_samples_needed(p1: GaussianPulse, p2: GaussianPulse) -> int:
    """Smallest power-of-two grid (at least the default) that passes the resolution check."""
    smax = max(p1.sigma, p2.sigma)
    span = abs(p2.arrival_time - p1.arrival_time) + 2.0 * OVERLAP_HALF_WIDTH * smax
    step = min(p1.duration_fwhm, p2.duration_fwhm) / 50.0
    detuning = abs(p2.carrier_offset - p1.carrier_offset)
    if detuning > 0:
        step = min(step, 0.05 / detuning)
    needed = int(math.ceil(span / step)) + 1
    return max(OVERLAP_SAMPLES, 1 << (needed - 1).bit_length())


def overlap_for_setting(kind: str, pulse_a: GaussianPulse, pulse_b: GaussianPulse,
                        value: float) -> float:
    """Overlap after offsetting pulse b from pulse a along one degree of freedom.

    ``kind`` is ``"polarization"`` (value in rad), ``"time"`` (s) or
    ``"frequency"`` (Hz).
    """
    if kind == "polarization":
        moved = pulse_b.replace(polarization_angle=pulse_a.polarization_angle + value)
    elif kind == "time":
        moved = pulse_b.replace(arrival_time=pulse_a.arrival_time + value)
    elif kind == "frequency":
        moved = pulse_b.replace(carrier_offset=pulse_a.carrier_offset + value)
    else:
        raise DomainError(f"unknown scan kind {kind!r}")
    return mode_overlap(pulse_a, moved, overlap_samples_needed(pulse_a, moved))


def output_intensities(phi, mu_a, mu_b, overlap, bs: BeamSplitter):
    """Mean photon numbers at outputs c and d for relative phase ``phi``.

    Input b is split into a part of amplitude ``overlap * sqrt(mu_b)`` that
    interferes with input a and an orthogonal remainder that does not.
    """
    phi = np.asarray(phi, dtype=float)
    sa = math.sqrt(mu_a)
    sb = overlap * math.sqrt(mu_b)
    rot = np.exp(1j * phi)
    i_c = np.abs(bs.t * sa + 1j * bs.r * sb * rot) ** 2 + bs.r**2 * (1.0 - overlap**2) * mu_b
    i_d = np.abs(1j * bs.r * sa + bs.t * sb * rot) ** 2 + bs.t**2 * (1.0 - overlap**2) * mu_b
    return i_c, i_d


def _periodic_mean(f, tol=QUAD_TOL, max_nodes=QUAD_MAX_NODES):
    """Mean of a smooth 2*pi-periodic function by trapezoid node doubling."""
    n = 8
    total = float(np.sum(f(2.0 * np.pi * np.arange(n) / n)))
    estimate = total / n
    while n < max_nodes:
        mids = 2.0 * np.pi * (np.arange(n) + 0.5) / n
        total += float(np.sum(f(mids)))
        n *= 2
        new = total / n
        if abs(new - estimate) <= tol:
            return new
        estimate = new
    raise AccuracyError(f"phase quadrature did not converge to {tol:g} with {n} nodes")


def _check_mu(*mus):
    for mu in mus:
        if not (math.isfinite(mu) and mu >= 0):
            raise DomainError(f"mean photon numbers must be finite and >= 0, got {mu}")


def coincidence_phase_averaged(mu_a: float, mu_b: float, overlap: float, bs: BeamSplitter,
                               d1: Detector = IDEAL, d2: Detector = IDEAL) -> float:
    """Coincidence probability averaged over a uniform relative phase."""
    _check_mu(mu_a, mu_b)
    overlap = check_overlap(overlap)

    def integrand(phi):
        i_c, i_d = output_intensities(phi, mu_a, mu_b, overlap, bs)
        return d1.click_for_mean(i_c) * d2.click_for_mean(i_d)

    return _periodic_mean(integrand)


def singles_phase_averaged(mu_a: float, mu_b: float, overlap: float, bs: BeamSplitter,
                           d1: Detector = IDEAL, d2: Detector = IDEAL) -> tuple[float, float]:
    """Click probabilities of the detectors on outputs c and d."""
    _check_mu(mu_a, mu_b)
    overlap = check_overlap(overlap)
    p1 = _periodic_mean(lambda phi: d1.click_for_mean(output_intensities(phi, mu_a, mu_b, overlap, bs)[0]))
    p2 = _periodic_mean(lambda phi: d2.click_for_mean(output_intensities(phi, mu_a, mu_b, overlap, bs)[1]))
    return p1, p2


def coincidence_exact(source_a, source_b, overlap: float, bs: BeamSplitter,
                      d1: Detector = IDEAL, d2: Detector = IDEAL,
                      policy: TruncationPolicy = DEFAULT_POLICY) -> float:
    """Coincidence probability by the Fock route."""
    return coincidence_probability(joint_output(source_a, source_b, overlap, bs, policy), d1, d2)


def detection_probabilities_exact(source_a, source_b, overlap: float, bs: BeamSplitter,
                                  d1: Detector = IDEAL, d2: Detector = IDEAL,
                                  policy: TruncationPolicy = DEFAULT_POLICY):
    """``(coincidence, single_1, single_2)`` from one Fock-route output distribution."""
    dist = joint_output(source_a, source_b, overlap, bs, policy)
    return (coincidence_probability(dist, d1, d2),
            single_detector_probability(dist, d1),
            second_detector_probability(dist, d2))


def hom_visibility_exact(mu_a, mu_b, overlap_parallel: float = 1.0,
                         bs: BeamSplitter = BeamSplitter(), d1: Detector = IDEAL,
                         d2: Detector = IDEAL,
                         policy: TruncationPolicy = DEFAULT_POLICY) -> HomResult:
    """Coincidence visibility between overlap ``overlap_parallel`` and fully distinguishable inputs.

    ``mu_a``/``mu_b`` are mean photon numbers or :class:`SourcePulse` values.
    """
    p_par = coincidence_exact(mu_a, mu_b, overlap_parallel, bs, d1, d2, policy)
    p_orth = coincidence_exact(mu_a, mu_b, 0.0, bs, d1, d2, policy)
    return HomResult.from_probabilities(p_par, p_orth)


def single_detector_visibility_exact(mu: float, bs: BeamSplitter = BeamSplitter(),
                                     det: Detector = IDEAL,
                                     policy: TruncationPolicy = DEFAULT_POLICY) -> HomResult:
    """Visibility of the interference dip in one detector's click rate, equal inputs ``mu``."""
    p_par = single_detector_probability(joint_output(mu, mu, 1.0, bs, policy), det)
    p_orth = single_detector_probability(joint_output(mu, mu, 0.0, bs, policy), det)
    return HomResult.from_probabilities(p_par, p_orth)


def closed_form_visibilities(mu: float, eta: float) -> tuple[float, float]:
    """Low-photon-number coincidence and single-detector visibilities.

    The coincidence visibility is 1/2 for any mean photon number; the
    single-detector one is ``eta*mu / (4 + 2*(4 - eta)*mu)``.
    """
    _check_mu(mu)
    if not 0.0 <= eta <= 1.0:
        raise DomainError(f"eta must lie in [0, 1], got {eta}")
    return 0.5, eta * mu / (4.0 + 2.0 * (4.0 - eta) * mu)


def single_visibility_supremum(eta: float) -> float:
    return eta / (2.0 * (4.0 - eta))


def infer_mu_from_single_visibility(v1x: float, eta: float) -> float:
    """Invert the single-detector closed form for the mean photon number."""
    if not 0.0 <= eta <= 1.0:
        raise DomainError(f"eta must lie in [0, 1], got {eta}")
    if v1x < 0:
        raise DomainError(f"visibility must be >= 0, got {v1x}")
    sup = single_visibility_supremum(eta)
    if v1x >= sup:
        if v1x == 0.0 == sup:
            raise NoSolutionError("eta = 0 gives no single-detector visibility to invert")
        raise NoSolutionError(
            f"single-detector visibility {v1x:g} is not below the supremum {sup:g} for eta={eta:g}")
    return 4.0 * v1x / (eta - 2.0 * (4.0 - eta) * v1x)
