import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from homsim.detect import Detector
from homsim.errors import DomainError, FitError
from homsim.hom import GaussianPulse, detection_probabilities_exact
from homsim.photonstat import SourcePulse
from homsim.splitter import BeamSplitter
from homsim.synth import CHUNK, CountRecord, HomSetup, fit_arrays, fit_curve, sample_counts

ANGLES = np.linspace(0.0, math.pi, 13)
PULSE = GaussianPulse(30e-9)


def polarization_setup(mu=0.5, eta=0.7):
    det = Detector(eta)
    return HomSetup(mu, mu, BeamSplitter(), det, det, "polarization", PULSE, PULSE)


def exact_probabilities(setup, setting):
    lam = setup.overlap(setting)
    return detection_probabilities_exact(SourcePulse.coherent(setup.mu_a),
                                         SourcePulse.coherent(setup.mu_b), lam, setup.bs,
                                         setup.d1, setup.d2)


def test_invalid_trials():
    setup = polarization_setup()
    for bad in (0, -3, 2.5):
        with pytest.raises(DomainError):
            sample_counts(setup, [0.0], bad, seed=1)


def test_zero_mean_gives_zero_counts():
    setup = HomSetup(0.0, 0.0, scan="overlap")
    (rec,) = sample_counts(setup, [1.0], 5000, seed=1)
    assert (rec.coincidences, rec.singles_1, rec.singles_2) == (0, 0, 0)


def test_record_validation():
    with pytest.raises(DomainError):
        CountRecord(0.0, 10, 11, 0, 0)


def test_counts_agree_with_exact_probabilities():
    setup = polarization_setup()
    trials = 10**6
    records = sample_counts(setup, ANGLES, trials, seed=2024)
    for rec in records:
        probs = exact_probabilities(setup, rec.setting)
        for p, k in zip(probs, (rec.coincidences, rec.singles_1, rec.singles_2)):
            sigma = math.sqrt(trials * p * (1 - p))
            assert abs(k - trials * p) <= 3 * sigma + 1


def test_dark_counts_show_up():
    det = Detector(1.0, 0.3)
    setup = HomSetup(0.0, 0.0, BeamSplitter(), det, det, "overlap")
    (rec,) = sample_counts(setup, [1.0], 40000, seed=5)
    assert rec.singles_1 / 40000 == pytest.approx(0.3, abs=0.01)
    assert rec.coincidences / 40000 == pytest.approx(0.09, abs=0.01)


def test_seed_determinism_and_worker_independence():
    setup = polarization_setup()
    trials = 2 * CHUNK + 17
    a = sample_counts(setup, ANGLES[:4], trials, seed=9)
    b = sample_counts(setup, ANGLES[:4], trials, seed=9, workers=4)
    c = sample_counts(setup, ANGLES[:4], trials, seed=10)
    assert a == b
    assert a != c


def test_noiseless_sine_recovered():
    x = np.linspace(0, math.pi, 11)
    y = 3.0 - 1.2 * np.cos(2 * (x - 0.3))
    fit = fit_arrays(x, y, "sine")
    assert fit["offset"] == pytest.approx(3.0, abs=1e-9)
    assert fit["amplitude"] == pytest.approx(1.2, abs=1e-9)
    assert fit["center"] == pytest.approx(0.3, abs=1e-9)
    assert fit.visibility == pytest.approx(2.4 / 4.2, abs=1e-9)
    assert fit.residual_rms < 1e-9


def test_noiseless_cosine_recovered_at_tiny_scale():
    x = np.linspace(0, 2 * math.pi, 17)
    y = 1e-9 * (2.0 - np.cos(x))
    fit = fit_arrays(x, y, "cosine")
    assert fit["offset"] == pytest.approx(2e-9, rel=1e-9)
    assert fit.visibility == pytest.approx(2 / 3, abs=1e-9)


@given(st.floats(0.5, 5.0), st.floats(0.05, 0.95), st.floats(-1.0, 1.0), st.floats(0.5, 3.0))
@settings(max_examples=25)
def test_noiseless_gaussian_recovered(baseline, frac, center, fwhm):
    x = np.linspace(-5, 5, 41)
    y = baseline - frac * baseline * np.exp(-4 * math.log(2) * (x - center) ** 2 / fwhm**2)
    fit = fit_arrays(x, y, "gaussian")
    assert fit["baseline"] == pytest.approx(baseline, rel=1e-9)
    assert fit["fwhm"] == pytest.approx(fwhm, rel=1e-9)
    assert fit["center"] == pytest.approx(center, abs=1e-9)
    assert fit.visibility == pytest.approx(frac, abs=1e-9)


def test_gaussian_with_fixed_center():
    x = np.linspace(0, 5, 30)
    y = 2.0 - 1.0 * np.exp(-4 * math.log(2) * x**2 / 1.5**2)
    fit = fit_arrays(x, y, "gaussian", fixed={"center": 0.0})
    assert fit["center"] == 0.0 and fit.errors["center"] == 0.0
    assert fit["fwhm"] == pytest.approx(1.5, rel=1e-9)


def test_fit_domain_errors():
    with pytest.raises(DomainError):
        fit_arrays([0, 1, 2], [1, 2, 3], "lorentzian")
    with pytest.raises(DomainError):
        fit_arrays([0, 1, 2], [1, 2, 3], "sine")
    with pytest.raises(DomainError):
        fit_arrays(np.arange(6), np.ones(6), "sine", fixed={"phase": 0})


def test_fit_error_when_budget_exhausted():
    x = np.linspace(-5, 5, 41)
    y = 2.0 - np.exp(-x**2)
    with pytest.raises(FitError) as info:
        fit_arrays(x, y, "gaussian", p0=[1.0, -3.0, 4.0, 0.1], maxfev=3)
    assert "p0" in info.value.diagnostics


def test_noisy_polarization_scan_within_three_sigma():
    setup = polarization_setup()
    records = sample_counts(setup, ANGLES, 10**6, seed=2024)
    fit = fit_curve(records, "sine")
    assert abs(fit.visibility - 0.5) <= 3 * fit.visibility_error
    assert fit.visibility_error < 0.01


def test_trial_count_consistency():
    setup = polarization_setup()
    small = fit_curve(sample_counts(setup, ANGLES, 10**4, seed=1), "sine")
    large = fit_curve(sample_counts(setup, ANGLES, 10**6, seed=2), "sine")
    combined = math.hypot(small.visibility_error, large.visibility_error)
    assert abs(small.visibility - large.visibility) <= 3 * combined
    assert large.visibility_error < small.visibility_error


def test_error_bars_are_calibrated():
    setup = polarization_setup(mu=0.3, eta=1.0)
    angles = np.linspace(0.0, math.pi, 7)
    truth = fit_arrays(angles, [exact_probabilities(setup, a)[0] for a in angles], "sine").visibility
    covered = 0
    for seed in range(100):
        fit = fit_curve(sample_counts(setup, angles, 20000, seed=seed), "sine")
        covered += abs(fit.visibility - truth) <= fit.visibility_error
    assert 58 <= covered <= 78
