import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from homsim.detect import (IDEAL, Detector, click_probability, coincidence_probability,
                           second_detector_probability, single_detector_probability)
from homsim.errors import DomainError
from homsim.splitter import (BeamSplitter, JointOutputDistribution, coherent_joint_output,
                             fock_output_indistinguishable)

BS = BeamSplitter()
unit = st.floats(0.0, 1.0)
dark = st.floats(0.0, 0.99)


def test_click_examples():
    assert click_probability(0, Detector(0.7)) == 0.0
    assert click_probability(1, Detector(0.7)) == pytest.approx(0.7)
    assert click_probability(3, Detector(0.5)) == pytest.approx(0.875)
    assert np.allclose(click_probability(np.arange(3), Detector(0.5)), [0.0, 0.5, 0.75])


def test_click_with_dark_counts():
    det = Detector(0.5, 0.1)
    assert click_probability(0, det) == pytest.approx(0.1)
    assert click_probability(2, det) == pytest.approx(1 - 0.9 * 0.25)
    assert det.click_for_mean(0.0) == pytest.approx(0.1)


def test_detector_validation():
    for eta, d in ((1.5, 0.0), (-0.1, 0.0), (0.5, 1.0), (0.5, -0.1)):
        with pytest.raises(DomainError):
            Detector(eta, d)
    with pytest.raises(DomainError):
        click_probability(-1, IDEAL)


def test_coincidence_examples():
    assert coincidence_probability(JointOutputDistribution.point(1, 1), IDEAL, IDEAL) == 1.0
    assert coincidence_probability(JointOutputDistribution.point(2, 0), Detector(0.4),
                                   Detector(0.9)) == 0.0
    bunched = fock_output_indistinguishable(1, 1, BS)
    assert coincidence_probability(bunched, IDEAL, IDEAL) == pytest.approx(0.0, abs=1e-15)


def test_single_examples():
    assert single_detector_probability(JointOutputDistribution.point(0, 3), IDEAL) == 0.0
    assert single_detector_probability(JointOutputDistribution.point(1, 0), Detector(0.7)) == \
        pytest.approx(0.7)
    assert second_detector_probability(JointOutputDistribution.point(0, 1), Detector(0.7)) == \
        pytest.approx(0.7)


@pytest.mark.parametrize("mu", [1e-3, 3e-3, 1e-2])
@pytest.mark.parametrize("eta", [0.3, 0.7, 1.0])
def test_single_detector_weak_expansion(mu, eta):
    # the expansion carries no vacuum normalization, so compare e^{2 mu} P to O(mu^3)
    p = single_detector_probability(coherent_joint_output(mu, mu, 0.0, BS), Detector(eta))
    expansion = eta * mu + eta * (2 - eta / 2) * mu**2
    assert abs(math.exp(2 * mu) * p - expansion) <= 3 * mu**3
    # truncation drops up to ~2 epsilon of mass
    assert p == pytest.approx(1 - math.exp(-eta * mu), abs=3e-12)


@given(st.integers(0, 30), st.integers(0, 30), unit, unit, dark, dark)
def test_click_monotone(n1, n2, e1, e2, d1, d2):
    n_lo, n_hi = sorted((n1, n2))
    e_lo, e_hi = sorted((e1, e2))
    d_lo, d_hi = sorted((d1, d2))
    base = click_probability(n_lo, Detector(e_lo, d_lo))
    assert click_probability(n_hi, Detector(e_lo, d_lo)) >= base - 1e-15
    assert click_probability(n_lo, Detector(e_hi, d_lo)) >= base - 1e-15
    assert click_probability(n_lo, Detector(e_lo, d_hi)) >= base - 1e-15
    assert 0.0 <= base <= 1.0


@given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=6),
       st.lists(st.floats(0.0, 1.0), min_size=1, max_size=6), unit, unit, dark, dark)
def test_factorization(wc, wd, e1, e2, k1, k2):
    pc = np.array(wc) + 1e-3
    pd = np.array(wd) + 1e-3
    pc, pd = pc / pc.sum(), pd / pd.sum()
    dist = JointOutputDistribution(np.outer(pc, pd))
    d1, d2 = Detector(e1, k1), Detector(e2, k2)
    joint = coincidence_probability(dist, d1, d2)
    product = single_detector_probability(dist, d1) * second_detector_probability(dist, d2)
    assert joint == pytest.approx(product, abs=1e-14)
    assert 0.0 <= joint <= 1.0
