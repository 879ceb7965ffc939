"""One test per acceptance criterion; each prints its [PASS]/[FAIL] line.

Criterion 4 (exact vs closed-form single-detector visibility at 5%) cannot be
met: the closed form drops a normalization factor that is 6% at the working
point. The check is implemented faithfully and reported as a strict xfail.
"""

import pytest

from homsim import acceptance as acc


def report(result, capsys):
    with capsys.disabled():
        print("\n" + result.line())
    return result


def test_criterion_01_coherent_limit(capsys):
    assert report(acc.check_coherent_limit(), capsys).passed


def test_criterion_02_oracle_equivalence(capsys):
    assert report(acc.check_oracle_equivalence(1e-14), capsys).passed


def test_criterion_03_single_photon_hom(capsys):
    assert report(acc.check_single_photon_hom(), capsys).passed


@pytest.mark.xfail(strict=True, reason="closed-form single-detector visibility misses an "
                   "exp(-2 mu) normalization; the exact value differs by 6.4% at mu=0.05")
def test_criterion_04_single_detector_visibility(capsys):
    assert report(acc.check_single_detector_visibility(), capsys).passed


def test_criterion_05_bsm_closed_forms(capsys):
    assert report(acc.check_bsm_closed_forms(), capsys).passed


def test_criterion_06_bsm_exact(capsys):
    assert report(acc.check_bsm_exact(), capsys).passed


def test_criterion_07_imbalance_law(capsys):
    assert report(acc.check_imbalance_law(), capsys).passed


def test_criterion_08_afc_bandwidth(capsys):
    assert report(acc.check_afc_bandwidth(), capsys).passed


def test_criterion_09_monte_carlo(capsys):
    assert report(acc.check_monte_carlo(), capsys).passed


def test_criterion_10_storage_configurations(capsys):
    assert report(acc.check_storage_configs(), capsys).passed


def test_every_criterion_has_a_test():
    names = [n for n in globals() if n.startswith("test_criterion_")]
    assert len(names) == len(acc.CHECKS)


def test_validate_loose_epsilon_fails_oracle_check():
    assert not acc.check_oracle_equivalence(0.1).passed
