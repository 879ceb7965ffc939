import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from homsim.errors import CapacityError, DomainError
from homsim.photonstat import SourcePulse, TruncationPolicy, poisson_pmf
from homsim.splitter import (BeamSplitter, JointOutputDistribution, coherent_joint_output,
                             distinguishable_amplitudes, fock_output_distinguishable,
                             fock_output_indistinguishable, indistinguishable_amplitudes,
                             joint_output)

BS = BeamSplitter()
counts = st.integers(0, 9)
splitters = st.floats(0.0, 1.0).map(BeamSplitter.from_reflectance)


def mixture_oracle(mu_a, mu_b, transform):
    pa, pb = poisson_pmf(mu_a), poisson_pmf(mu_b)
    size = pa.n_max + pb.n_max + 1
    out = np.zeros((size, size))
    for n, wa in enumerate(pa.probs):
        for m, wb in enumerate(pb.probs):
            d = transform(n, m).probs
            out[: d.shape[0], : d.shape[1]] += wa * wb * d
    return out


def test_bunching():
    d = fock_output_indistinguishable(1, 1, BS)
    assert d[1, 1] == pytest.approx(0.0, abs=1e-15)
    assert d[2, 0] == pytest.approx(0.5, abs=1e-15)
    assert d[0, 2] == pytest.approx(0.5, abs=1e-15)


@given(splitters)
def test_single_photon_splits(bs):
    d = fock_output_indistinguishable(1, 0, bs)
    assert d[1, 0] == pytest.approx(bs.t**2, abs=1e-14)
    assert d[0, 1] == pytest.approx(bs.r**2, abs=1e-14)


def test_two_photons_one_port():
    d = fock_output_indistinguishable(2, 0, BS)
    assert (d[2, 0], d[1, 1], d[0, 2]) == pytest.approx((0.25, 0.5, 0.25), abs=1e-15)


def test_distinguishable_pair():
    d = fock_output_distinguishable(1, 1, BS)
    assert (d[2, 0], d[1, 1], d[0, 2]) == pytest.approx((0.25, 0.5, 0.25), abs=1e-15)


def test_transparent_splitter():
    d = fock_output_distinguishable(1, 1, BeamSplitter(0.0, 1.0))
    assert d[1, 1] == pytest.approx(1.0)


@given(st.integers(0, 12), splitters)
def test_one_empty_input_is_insensitive_to_distinguishability(n, bs):
    a = fock_output_indistinguishable(n, 0, bs).probs
    b = fock_output_distinguishable(n, 0, bs).probs
    assert np.allclose(a, b, atol=1e-13)


def test_amplitude_convention():
    # a -> t c + i r d for one photon
    amps = indistinguishable_amplitudes(1, 0, BeamSplitter.from_reflectance(0.3))
    assert amps[1] == pytest.approx(math.sqrt(0.7))
    assert amps[0] == pytest.approx(1j * math.sqrt(0.3))
    assert distinguishable_amplitudes(1, 1, BS).shape == (2, 2)


@given(counts, counts, splitters)
def test_unitarity_and_conservation(n, m, bs):
    for fn in (fock_output_indistinguishable, fock_output_distinguishable):
        d = fn(n, m, bs)
        assert d.total() == pytest.approx(1.0, abs=1e-12)
        assert all(nc + nd == n + m for nc, nd, _ in d.support())


@given(counts, counts, splitters)
def test_swap_symmetry(n, m, bs):
    for fn in (fock_output_indistinguishable, fock_output_distinguishable):
        assert np.allclose(fn(m, n, bs).probs, fn(n, m, bs).mirrored().probs, atol=1e-13)


def test_coherent_vacuum():
    d = coherent_joint_output(0.0, 0.0, 0.5, BS)
    assert d.probs.shape == (1, 1) and d[0, 0] == 1.0


@pytest.mark.parametrize("lam,fn", [(1.0, fock_output_indistinguishable),
                                    (0.0, fock_output_distinguishable)])
def test_coherent_matches_mixture_oracle(lam, fn):
    d = coherent_joint_output(0.6, 0.6, lam, BS)
    oracle = mixture_oracle(0.6, 0.6, lambda n, m: fn(n, m, BS))
    assert np.allclose(d.probs, oracle, atol=1e-15)


@given(st.floats(0.0, 2.0), st.floats(0.0, 2.0), st.floats(0.0, 1.0), splitters)
def test_energy_conservation(mu_a, mu_b, lam, bs):
    d = coherent_joint_output(mu_a, mu_b, lam, bs)
    assert d.mean_c() == pytest.approx(bs.t**2 * mu_a + bs.r**2 * mu_b, abs=1e-9)
    assert d.mean_d() == pytest.approx(bs.r**2 * mu_a + bs.t**2 * mu_b, abs=1e-9)
    assert d.total() + d.tail_bound == pytest.approx(1.0, abs=1e-10)


@given(st.floats(0.05, 1.5), st.floats(0.0, 1.0))
def test_overlap_continuity(mu, lam):
    lo = coherent_joint_output(mu, mu, max(0.0, lam - 1e-6), BS).probs
    hi = coherent_joint_output(mu, mu, min(1.0, lam + 1e-6), BS).probs
    size = max(lo.shape[0], hi.shape[0])
    pad = lambda p: np.pad(p, ((0, size - p.shape[0]), (0, size - p.shape[1])))  # noqa: E731
    assert np.max(np.abs(pad(lo) - pad(hi))) < 1e-5


def test_partial_overlap_endpoints_agree():
    for lam in (0.0, 1.0):
        near = coherent_joint_output(0.4, 0.7, abs(lam - 1e-9), BS).probs
        exact = coherent_joint_output(0.4, 0.7, lam, BS).probs
        size = max(near.shape[0], exact.shape[0])
        a = np.pad(near, ((0, size - near.shape[0]), (0, size - near.shape[1])))
        b = np.pad(exact, ((0, size - exact.shape[0]), (0, size - exact.shape[1])))
        assert np.max(np.abs(a - b)) < 1e-8


def test_fock_input_with_partial_overlap_is_mirrored():
    d = joint_output(SourcePulse.coherent(0.3), SourcePulse.fock(1), 0.5, BS)
    e = joint_output(SourcePulse.fock(1), SourcePulse.coherent(0.3), 0.5, BS)
    size = max(d.probs.shape[0], e.probs.shape[0])
    assert np.allclose(d.probs[:size, :size], e.mirrored().probs[:size, :size], atol=1e-14)
    with pytest.raises(DomainError):
        joint_output(SourcePulse.fock(1), SourcePulse.fock(1), 0.5, BS)


def test_errors():
    with pytest.raises(DomainError):
        BeamSplitter(0.5, 0.5)
    with pytest.raises(DomainError):
        coherent_joint_output(0.1, 0.1, 1.2, BS)
    with pytest.raises(DomainError):
        fock_output_indistinguishable(-1, 0, BS)
    with pytest.raises(CapacityError) as info:
        coherent_joint_output(40.0, 0.1, 1.0, BS, TruncationPolicy(1e-12, hard_cap=20))
    assert info.value.tail > 1e-12
    with pytest.raises(DomainError):
        JointOutputDistribution(np.array([[0.5, -0.1]]))
