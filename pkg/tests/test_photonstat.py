import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from homsim.errors import CapacityError, DomainError
from homsim.photonstat import (COHERENT, FOCK, PhotonNumberPMF, SourcePulse, TruncationPolicy,
                               as_source, fock_pmf, poisson_pmf)


def poisson_term(mu, n):
    return math.exp(-mu + n * math.log(mu) - math.lgamma(n + 1))


def tail_by_summation(mu, n_max, extra=400):
    # positive terms only, so no cancellation
    return math.fsum(poisson_term(mu, n) for n in range(n_max + 1, n_max + extra))


def test_vacuum():
    pmf = poisson_pmf(0.0)
    assert list(pmf.probs) == [1.0]
    assert pmf.tail_bound == 0.0


def test_zero_photon_entry():
    assert poisson_pmf(0.6).probs[0] == pytest.approx(math.exp(-0.6), rel=1e-14)
    assert poisson_pmf(0.6).probs[0] == pytest.approx(0.548812, abs=5e-7)


def test_cutoff_matches_summation_oracle():
    pmf = poisson_pmf(0.6, TruncationPolicy(1e-12))
    oracle = next(n for n in range(100) if tail_by_summation(0.6, n) < 1e-12)
    assert pmf.n_max == oracle
    # frozen: the oracle puts the cutoff at 12
    assert pmf.n_max == 12
    assert pmf.tail_bound == pytest.approx(tail_by_summation(0.6, 12), rel=1e-9)


def test_entries_match_closed_form():
    pmf = poisson_pmf(2.3)
    for n, p in enumerate(pmf.probs):
        assert p == pytest.approx(poisson_term(2.3, n), rel=1e-12)


@pytest.mark.parametrize("mu", [-0.1, math.inf, math.nan])
def test_bad_mean(mu):
    with pytest.raises(DomainError):
        poisson_pmf(mu)


def test_hard_cap_reports_tail():
    pmf = poisson_pmf(40.0, TruncationPolicy(1e-12, hard_cap=20))
    assert pmf.n_max == 20
    assert pmf.tail_bound == pytest.approx(tail_by_summation(40.0, 20), rel=1e-9)
    assert pmf.tail_bound > 1e-12


def test_fock_examples():
    assert list(fock_pmf(0).probs) == [1.0]
    assert list(fock_pmf(1).probs) == [0.0, 1.0]
    with pytest.raises(CapacityError):
        fock_pmf(2, TruncationPolicy(hard_cap=1))


def test_policy_validation():
    for eps in (0.0, 1.0, -1e-3):
        with pytest.raises(DomainError):
            TruncationPolicy(eps)
    with pytest.raises(DomainError):
        TruncationPolicy(1e-12, hard_cap=0)


def test_pmf_rejects_negative_entries():
    with pytest.raises(DomainError):
        PhotonNumberPMF(np.array([1.2, -0.2]))


def test_source_pulse():
    assert SourcePulse.coherent(0.5).kind == COHERENT
    assert SourcePulse.fock(3).is_fock and SourcePulse.fock(3).kind == FOCK
    assert as_source(0.2) == SourcePulse.coherent(0.2)
    with pytest.raises(DomainError):
        SourcePulse(1.5, FOCK)
    with pytest.raises(DomainError):
        SourcePulse(-1.0)
    with pytest.raises(DomainError):
        SourcePulse(1.0, "thermal")


@given(st.floats(0.0, 50.0))
def test_normalization(mu):
    pmf = poisson_pmf(mu)
    assert np.all(pmf.probs >= 0)
    assert abs(pmf.probs.sum() + pmf.tail_bound - 1.0) <= 1e-12


@given(st.floats(0.0, 50.0))
def test_mean_recovery(mu):
    pmf = poisson_pmf(mu)
    # the dropped mean is exactly mu * P(n >= n_max), slightly above tail * n_max
    missing = mu * (pmf.tail_bound + pmf.probs[-1]) if mu else 0.0
    assert mu - pmf.mean() == pytest.approx(missing, abs=1e-12 * max(mu, 1.0))
    assert abs(pmf.mean() - mu) <= max(1e-9, pmf.tail_bound * (pmf.n_max + 1 + mu))


@given(st.floats(0.0, 30.0), st.floats(-14, -1), st.floats(-14, -1))
def test_monotone_truncation(mu, log_a, log_b):
    lo, hi = sorted((10**log_a, 10**log_b))
    assert poisson_pmf(mu, TruncationPolicy(hi)).n_max <= poisson_pmf(mu, TruncationPolicy(lo)).n_max


@given(st.floats(0.0, 20.0), st.floats(-14, -2))
def test_tail_within_epsilon_below_cap(mu, log_eps):
    policy = TruncationPolicy(10**log_eps)
    pmf = poisson_pmf(mu, policy)
    if pmf.n_max < policy.hard_cap:
        assert pmf.tail_bound <= policy.epsilon
