"""Phenomenological atomic-frequency-comb memory: recall, filtering, loss bookkeeping.

The comb teeth only set the recall delay ``1/tooth_spacing``; spectrally the
memory acts as a Gaussian band-pass whose intensity transmission has FWHM
``bandwidth``. Filtering a Fourier-limited Gaussian by a Gaussian keeps it
Fourier-limited, so the recalled pulse is again a :class:`GaussianPulse`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .detect import IDEAL
from .errors import DomainError, NoSolutionError, StateError
from .hom import GaussianPulse, HomResult, hom_visibility_exact, mode_overlap, overlap_samples_needed
from .photonstat import DEFAULT_POLICY, TruncationPolicy
from .splitter import BeamSplitter

SPEED_OF_LIGHT = 299_792_458.0  # m/s


@dataclass(frozen=True)
class AfcMemory:
    """Memory configuration; all quantities SI.

    ``inactive_optical_depth`` is the flat absorption seen by light passing a
    deactivated memory (transmission ``exp(-OD)``).
    """

    tooth_spacing: float
    bandwidth: float
    peak_efficiency: float
    decoherence_time: float = math.inf
    coupling_transmission: float = 1.0
    active: bool = True
    inactive_optical_depth: float = 0.0

    def __post_init__(self):
        if not self.tooth_spacing > 0:
            raise DomainError(f"tooth_spacing must be > 0, got {self.tooth_spacing}")
        if not self.bandwidth > 0:
            raise DomainError(f"bandwidth must be > 0, got {self.bandwidth}")
        for name in ("peak_efficiency", "coupling_transmission"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise DomainError(f"{name} must lie in [0, 1], got {value}")
        if not self.decoherence_time > 0:
            raise DomainError(f"decoherence_time must be > 0, got {self.decoherence_time}")
        if not self.inactive_optical_depth >= 0:
            raise DomainError(f"inactive_optical_depth must be >= 0, got {self.inactive_optical_depth}")

    def replace(self, **changes) -> "AfcMemory":
        return replace(self, **changes)


@dataclass(frozen=True)
class MemoryOutput:
    pulse: GaussianPulse
    efficiency: float


def storage_time(mem: AfcMemory) -> float:
    if not mem.active:
        raise StateError("storage time is undefined for an inactive memory")
    return 1.0 / mem.tooth_spacing


def filter_gaussian(pulse: GaussianPulse, bandwidth: float) -> tuple[GaussianPulse, float]:
    """Pass a Fourier-limited pulse through a Gaussian filter of intensity FWHM ``bandwidth``.

    Returns the filtered pulse and the transmitted energy fraction.
    """
    ratio = pulse.bandwidth_fwhm / bandwidth
    fraction = 1.0 / math.sqrt(1.0 + ratio**2)
    out = pulse.replace(duration_fwhm=pulse.duration_fwhm * math.sqrt(1.0 + ratio**2))
    return out, fraction


def _check_mu(mu):
    if not (math.isfinite(mu) and mu >= 0):
        raise DomainError(f"mean photon number must be finite and >= 0, got {mu}")


def recall(mem: AfcMemory, pulse: GaussianPulse, input_mu: float) -> tuple[MemoryOutput, float]:
    """Store and re-emit a pulse; returns the recalled pulse and its mean photon number."""
    if not mem.active:
        raise StateError("recall needs an active memory; use transmit() for an inactive one")
    _check_mu(input_mu)
    t_store = storage_time(mem)
    filtered, fraction = filter_gaussian(pulse, mem.bandwidth)
    efficiency = (mem.peak_efficiency * mem.coupling_transmission
                  * math.exp(-t_store / mem.decoherence_time) * fraction)
    out = filtered.replace(arrival_time=pulse.arrival_time + t_store)
    return MemoryOutput(out, efficiency), input_mu * efficiency


def transmit(mem: AfcMemory, pulse: GaussianPulse, input_mu: float) -> tuple[MemoryOutput, float]:
    """Pass a pulse through the memory without storage: flat attenuation only."""
    _check_mu(input_mu)
    efficiency = mem.coupling_transmission * math.exp(-mem.inactive_optical_depth)
    return MemoryOutput(pulse, efficiency), input_mu * efficiency


def pass_through(mem: AfcMemory, pulse: GaussianPulse, input_mu: float):
    """:func:`recall` for an active memory, :func:`transmit` otherwise."""
    return (recall if mem.active else transmit)(mem, pulse, input_mu)


def balance_source_mu(target_mu_at_bs: float, chain) -> float:
    """Source mean photon number that yields ``target_mu_at_bs`` after the transmission chain."""
    if not (math.isfinite(target_mu_at_bs) and target_mu_at_bs >= 0):
        raise DomainError(f"target must be finite and >= 0, got {target_mu_at_bs}")
    product = 1.0
    for tr in chain:
        if tr == 0:
            raise NoSolutionError("a zero-transmission stage cannot be balanced")
        if not 0.0 < tr <= 1.0:
            raise DomainError(f"stage transmissions must lie in (0, 1], got {tr}")
        product *= tr
    return target_mu_at_bs / product


def pulse_timing_offset(refractive_index: float, path_length: float, rep_period: float) -> float:
    """Delay between a pulse and the next train pulse at the other input: ``(n*l/c) mod T_rep``."""
    if not rep_period > 0:
        raise DomainError(f"repetition period must be > 0, got {rep_period}")
    offset = (refractive_index * path_length / SPEED_OF_LIGHT) % rep_period
    # an exact multiple may land a rounding error below the period
    if rep_period - offset <= 1e-12 * rep_period:
        return 0.0
    return offset


@dataclass
class BandwidthScan:
    bandwidths: np.ndarray
    visibilities: np.ndarray
    overlaps: np.ndarray
    source_mu_a: np.ndarray
    source_mu_b: np.ndarray
    mu_a_at_bs: np.ndarray
    mu_b_at_bs: np.ndarray
    results: list = field(default_factory=list)


def visibility_vs_bandwidth(mem_template: AfcMemory, pulse: GaussianPulse, mu: float,
                            bs: BeamSplitter, detectors=(IDEAL, IDEAL), bandwidths=(),
                            policy: TruncationPolicy = DEFAULT_POLICY,
                            mem_b: AfcMemory | None = None) -> BandwidthScan:
    """HOM visibility of a recalled pulse against a transmitted one, per comb bandwidth.

    Memory a is activated with each bandwidth; memory b (default: an inactive
    copy of the template) only transmits. Source photon numbers are re-balanced
    so both arms deliver ``mu`` at the splitter, and pulse b is re-timed onto
    the echo.
    """
    grid = np.asarray(bandwidths, dtype=float)
    if grid.size == 0:
        raise DomainError("bandwidth grid is empty")
    d1, d2 = detectors
    mem_b = mem_b if mem_b is not None else mem_template.replace(active=False)
    n = grid.size
    scan = BandwidthScan(grid, np.empty(n), np.empty(n), np.empty(n), np.empty(n),
                         np.empty(n), np.empty(n))
    out_b, _ = transmit(mem_b, pulse, 0.0)
    for i, bandwidth in enumerate(grid):
        mem_a = mem_template.replace(bandwidth=float(bandwidth), active=True)
        probe, _ = recall(mem_a, pulse, 0.0)
        src_a = balance_source_mu(mu, [probe.efficiency])
        src_b = balance_source_mu(mu, [out_b.efficiency])
        rec_a, mu_a = recall(mem_a, pulse, src_a)
        tr_b, mu_b = transmit(mem_b, pulse, src_b)
        aligned_b = tr_b.pulse.replace(arrival_time=rec_a.pulse.arrival_time)
        lam = mode_overlap(rec_a.pulse, aligned_b,
                           overlap_samples_needed(rec_a.pulse, aligned_b))
        res: HomResult = hom_visibility_exact(mu_a, mu_b, lam, bs, d1, d2, policy)
        scan.visibilities[i] = res.visibility
        scan.overlaps[i] = lam
        scan.source_mu_a[i], scan.source_mu_b[i] = src_a, src_b
        scan.mu_a_at_bs[i], scan.mu_b_at_bs[i] = mu_a, mu_b
        scan.results.append(res)
    return scan
