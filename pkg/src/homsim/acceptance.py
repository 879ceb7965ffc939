"""Cross-oracle acceptance checks, shared by ``homsim validate`` and the test suite."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .afcmem import AfcMemory, visibility_vs_bandwidth
from .bsm import (EARLY, EARLY_LATE, LATE, MINUS, PLUS, PLUS_MINUS, bsm_phase_scan,
                  classical_quantum_bounds, error_rate, fidelity_from_error,
                  psi_minus_probability_attenuated, psi_minus_probability_exact)
from .config import ExperimentConfig, MemoryConfig, SourceConfig, SweepConfig
from .detect import IDEAL, Detector
from .errors import HomsimError
from .hom import (GaussianPulse, closed_form_visibilities, coincidence_exact,
                  coincidence_phase_averaged, hom_visibility_exact,
                  infer_mu_from_single_visibility, single_detector_visibility_exact)
from .photonstat import SourcePulse, TruncationPolicy
from .splitter import BeamSplitter
from .synth import HomSetup, fit_arrays, fit_curve, sample_counts

BS = BeamSplitter()
STORAGE_MU_AT_BS = 3.4e-4
STORAGE_CHAIN = 5.67e-4
REFERENCE_AFC_FWHM_MHZ = 79.0


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0
    values: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.number:2d} {self.name}: {self.detail} ({self.seconds:.2f} s)"


def _timed(number: int, name: str, limit: float | None, body: Callable[[], tuple]) -> CheckResult:
    start = time.perf_counter()
    try:
        passed, detail, values = body()
    except HomsimError as exc:
        passed, detail, values = False, f"raised {type(exc).__name__}: {exc}", {}
    elapsed = time.perf_counter() - start
    if limit is not None and elapsed >= limit:
        passed = False
        detail += f"; runtime {elapsed:.2f} s exceeds {limit:g} s"
    return CheckResult(number, name, passed, detail, elapsed, values)


# ---------------------------------------------------------------------------


def check_coherent_limit() -> CheckResult:
    def body():
        det = Detector(0.7)
        v = {mu: hom_visibility_exact(mu, mu, 1.0, BS, det, det).visibility
             for mu in (1e-3, 1e-2, 5e-2)}
        ok = abs(v[1e-3] - 0.5) <= 1e-3 and all(abs(x - 0.5) <= 1e-2 for x in v.values())
        detail = ", ".join(f"V(mu={mu:g})={x:.6f}" for mu, x in v.items())
        return ok, detail, {"visibility": v}
    return _timed(1, "coherent-state HOM limit", 1.0, body)


def check_oracle_equivalence(epsilon: float = 1e-14) -> CheckResult:
    def body():
        policy = TruncationPolicy(epsilon)
        worst = 0.0
        for lam in (0.0, 1.0):
            for mu_a in (0.1, 0.6, 2.0):
                for mu_b in (0.1, 0.6, 2.0):
                    for eta in (0.3, 0.7, 1.0):
                        det = Detector(eta)
                        fock = coincidence_exact(mu_a, mu_b, lam, BS, det, det, policy)
                        avg = coincidence_phase_averaged(mu_a, mu_b, lam, BS, det, det)
                        worst = max(worst, abs(fock - avg))
        return worst <= 1e-9, f"max |Fock - phase average| = {worst:.3g} at epsilon={epsilon:g}", \
            {"max_abs_diff": worst}
    return _timed(2, "oracle equivalence", 10.0, body)


def check_single_photon_hom() -> CheckResult:
    def body():
        one = SourcePulse.fock(1)
        p_par = coincidence_exact(one, one, 1.0, BS)
        p_orth = coincidence_exact(one, one, 0.0, BS)
        vis = (p_orth - p_par) / p_orth
        ok = abs(p_par) <= 1e-12 and abs(p_orth - 0.5) <= 1e-12 and abs(vis - 1.0) <= 1e-12
        return ok, f"P(lambda=1)={p_par:.3g}, P(lambda=0)={p_orth:.15f}, V={vis:.15f}", \
            {"p_parallel": p_par, "p_orthogonal": p_orth}
    return _timed(3, "single-photon HOM", None, body)


def check_single_detector_visibility() -> CheckResult:
    def body():
        eta = 0.7
        exact = single_detector_visibility_exact(0.05, BS, Detector(eta)).visibility
        _, closed = closed_form_visibilities(0.05, eta)
        rel = abs(exact - closed) / closed
        _, v_half = closed_form_visibilities(0.5, eta)
        mu_back = infer_mu_from_single_visibility(closed_form_visibilities(0.05, eta)[1], eta)
        parts = [rel <= 0.05, abs(v_half - 0.0479) <= 5e-5, abs(mu_back - 0.05) <= 1e-9]
        detail = (f"exact {exact:.6f} vs closed form {closed:.6f} (rel {rel:.2%}, limit 5%); "
                  f"v1x(0.5)={v_half:.5f}; round-trip mu={mu_back:.12g}")
        return all(parts), detail, {"exact": exact, "closed": closed, "relative": rel,
                                    "v1x_half": v_half, "mu_roundtrip": mu_back}
    return _timed(4, "single-detector visibility", None, body)


def check_bsm_closed_forms() -> CheckResult:
    def body():
        mu = 1e-3
        p = lambda qa, qb: psi_minus_probability_attenuated(qa, qb, mu)  # noqa: E731
        e_el = error_rate(p(EARLY, EARLY), p(EARLY, LATE))
        e_pm = error_rate(p(PLUS, PLUS), p(PLUS, MINUS))
        scan = bsm_phase_scan(mu, np.linspace(0.0, 2.0 * math.pi, 25))
        b = classical_quantum_bounds()
        f_el = fidelity_from_error(0.039, EARLY_LATE)
        f_pm = fidelity_from_error(0.287, PLUS_MINUS)
        checks = [
            e_el == 0.0,
            abs(e_pm - 0.25) <= 1e-12,
            abs(scan.visibility - 2.0 / 3.0) <= 1e-9,
            abs(b["e_el_att_CM"] - 0.333) <= 5e-4,
            abs(b["e_pm_att_CM"] - 0.417) <= 5e-4,
            abs(b["F_CM"] - 0.667) <= 5e-4,
            abs(f_el - 0.961) <= 5e-4,
            abs(f_pm - 0.926) <= 5e-4,
        ]
        detail = (f"e_el={e_el:g}, e_pm={e_pm:.12f}, V_pm={scan.visibility:.12f}, "
                  f"bounds {b['e_el_att_CM']:.3f}/{b['e_pm_att_CM']:.3f}/{b['F_CM']:.3f}, "
                  f"F_el={f_el:.4f}, F_pm={f_pm:.4f}")
        return all(checks), detail, {"e_el": e_el, "e_pm": e_pm, "v_pm": scan.visibility}
    return _timed(5, "BSM closed forms", None, body)


def check_bsm_exact() -> CheckResult:
    def body():
        mu = 1e-3
        scale = mu**2 * math.exp(-2 * mu)
        ratios = {}
        ok = True
        for label, basis in (("e/l", (EARLY, LATE)), ("+/-", (PLUS, MINUS))):
            for qa in basis:
                for qb in basis:
                    exact = psi_minus_probability_exact(qa, qb, mu=mu)
                    closed = psi_minus_probability_attenuated(qa, qb, mu)
                    key = f"{label}:{qa.theta:.3f},{qa.phi:.3f}|{qb.theta:.3f},{qb.phi:.3f}"
                    if closed <= 1e-12 * scale:
                        ratios[key] = None
                        ok &= exact <= 1e-12 * scale
                    else:
                        ratios[key] = exact / closed
                        ok &= 0.99 <= exact / closed <= 1.01
        finite = [r for r in ratios.values() if r is not None]
        detail = (f"{len(finite)} ratios in [{min(finite):.5f}, {max(finite):.5f}], "
                  f"{len(ratios) - len(finite)} zero-probability pairs exactly suppressed")
        return ok, detail, {"ratios": ratios}
    return _timed(6, "exact vs closed-form BSM", 30.0, body)


def check_imbalance_law() -> CheckResult:
    def body():
        mu_b = 1e-3
        vis = {}
        ok = True
        for ratio in (1.0, 2.0, 4.0):
            mu_a = ratio * mu_b
            v = hom_visibility_exact(mu_a, mu_b).visibility
            law = 2 * mu_a * mu_b / (mu_a + mu_b) ** 2
            vis[ratio] = v
            ok &= abs(v - law) <= 0.01 * law
        ok &= vis[1.0] > vis[2.0] > vis[4.0]
        detail = ", ".join(f"V(ratio {r:g})={v:.5f} law {2 * r / (1 + r) ** 2:.5f}"
                           for r, v in vis.items())
        return ok, detail, {"visibility": vis}
    return _timed(7, "imbalance law", None, body)


def afc_reference_scan():
    """Bandwidth scan of an 8 ns pulse against a 30 ns, 1.5 % memory."""
    pulse = GaussianPulse(8e-9)
    mem = AfcMemory(1.0 / 30e-9, 600e6, 0.015, decoherence_time=1e-6)
    grid = np.linspace(10e6, 600e6, 60)
    return visibility_vs_bandwidth(mem, pulse, 1e-3, BS, (IDEAL, IDEAL), grid)


def check_afc_bandwidth() -> CheckResult:
    def body():
        scan = afc_reference_scan()
        b_mhz = scan.bandwidths / 1e6
        v = scan.visibilities
        monotone = bool(np.all(np.diff(v) >= -1e-12))
        plateau = v[b_mhz >= 100.0]
        change = (plateau.max() - plateau.min()) / plateau.max()
        fit = fit_arrays(b_mhz, v, "gaussian", fixed={"center": 0.0})
        fwhm = fit.params["fwhm"]
        ok = (monotone and change < 0.01
              and REFERENCE_AFC_FWHM_MHZ / 2 <= fwhm <= 2 * REFERENCE_AFC_FWHM_MHZ)
        detail = (f"monotone={monotone}, plateau change {change:.3%}, Gaussian FWHM {fwhm:.1f} MHz "
                  f"(window {REFERENCE_AFC_FWHM_MHZ / 2:g}-{2 * REFERENCE_AFC_FWHM_MHZ:g})")
        return ok, detail, {"fwhm_mhz": fwhm, "plateau_change": change}
    return _timed(8, "AFC bandwidth scan", 30.0, body)


def monte_carlo_polarization(trials: int = 10**6, seed: int = 2024, workers: int = 1):
    det = Detector(0.7)
    pulse = GaussianPulse(8e-9)
    setup = HomSetup(0.5, 0.5, BS, det, det, "polarization", pulse, pulse)
    angles = np.linspace(0.0, math.pi, 13)
    records = sample_counts(setup, angles, trials, seed, workers)
    return records, fit_curve(records, "sine")


def check_monte_carlo() -> CheckResult:
    def body():
        _, fit = monte_carlo_polarization()
        z = abs(fit.visibility - 0.5) / fit.visibility_error
        detail = f"V={fit.visibility:.4f} +/- {fit.visibility_error:.4f}, |V-0.5|={z:.2f} sigma"
        return z <= 3.0, detail, {"visibility": fit.visibility, "error": fit.visibility_error}
    return _timed(9, "Monte Carlo pipeline", 120.0, body)


def storage_configs() -> dict[str, ExperimentConfig]:
    """The three storage configurations with ideal detectors.

    Path transmissions are chosen so a source mean photon number of 0.6
    (4.6 before the less efficient memory) arrives as 0.6 x 5.67e-4 at the
    splitter.
    """
    mem_a = MemoryConfig(active=True, bandwidth_mhz=600.0, peak_efficiency=0.015,
                         storage_time_ns=30.0)
    mem_b = MemoryConfig(active=True, bandwidth_mhz=600.0, peak_efficiency=0.004,
                         storage_time_ns=30.0)
    idle_a = MemoryConfig(active=False, bandwidth_mhz=600.0, peak_efficiency=0.015,
                          storage_time_ns=30.0)
    idle_b = MemoryConfig(active=False, bandwidth_mhz=600.0, peak_efficiency=0.004,
                          storage_time_ns=30.0)
    sweep = SweepConfig("polarization", (0.0, 15.0, 30.0, 45.0, 60.0, 75.0, 90.0))
    plain = SourceConfig(mean_photons=0.6, path_transmission=STORAGE_CHAIN)
    stored_a = SourceConfig(mean_photons=0.6, path_transmission=STORAGE_PATH_A)
    stored_b = SourceConfig(mean_photons=4.6, path_transmission=STORAGE_PATH_B)
    return {
        "no-storage": ExperimentConfig(plain, plain, sweep, idle_a, idle_b, name="no-storage"),
        "single-storage": ExperimentConfig(stored_a, plain, sweep, mem_a, idle_b,
                                           name="single-storage"),
        "double-storage": ExperimentConfig(stored_a, stored_b, sweep, mem_a, mem_b,
                                           name="double-storage"),
    }


# 5.67e-4 divided by the recall efficiency of each memory for an 8 ns pulse
STORAGE_PATH_A = 0.0379593954
STORAGE_PATH_B = 0.0185670956


def check_storage_configs() -> CheckResult:
    from .runner import prepare_arms, run_sweep

    def body():
        vis, mus = {}, {}
        ok = True
        for name, cfg in storage_configs().items():
            out = run_sweep(cfg)
            a, b = prepare_arms(cfg)
            vis[name] = out.summary["visibility"]
            mus[name] = (a.mu_at_bs, b.mu_at_bs)
            ok &= abs(vis[name] - 0.5) <= 1e-3
            ok &= all(abs(m - STORAGE_MU_AT_BS) <= 0.01 * STORAGE_MU_AT_BS for m in mus[name])
        detail = ", ".join(f"{k}: V={v:.5f} (mu {mus[k][0]:.4g}/{mus[k][1]:.4g})"
                           for k, v in vis.items())
        return ok, detail, {"visibility": vis, "mu_at_bs": mus}
    return _timed(10, "storage configurations", None, body)


CHECKS = (check_coherent_limit, check_oracle_equivalence, check_single_photon_hom,
          check_single_detector_visibility, check_bsm_closed_forms, check_bsm_exact,
          check_imbalance_law, check_afc_bandwidth, check_monte_carlo, check_storage_configs)


def run_all(epsilon: float = 1e-14) -> list[CheckResult]:
    results = []
    for check in CHECKS:
        if check is check_oracle_equivalence:
            results.append(check(epsilon))
        else:
            results.append(check())
    return results
