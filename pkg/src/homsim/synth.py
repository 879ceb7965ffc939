"""Synthetic count records and least-squares fits of interference curves.

Counts are drawn pulse by pulse: each trial gets a fresh uniform relative
phase, the detectors click with the Poissonian click probability for that
phase, and clicks are Bernoulli draws. Trials are cut into fixed-size chunks
whose random streams depend only on ``(seed, setting index, chunk index)``,
so the totals do not depend on how many workers process the chunks.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import OptimizeWarning, curve_fit

from .detect import IDEAL, Detector
from .errors import DomainError, FitError
from .hom import GaussianPulse, output_intensities, overlap_for_setting
from .splitter import BeamSplitter, check_overlap

CHUNK = 1 << 17
FOUR_LN2 = 4.0 * math.log(2.0)


@dataclass(frozen=True)
class HomSetup:
    """Everything needed to turn a scan setting into click probabilities.

    ``scan`` names the degree of freedom varied between pulse a and pulse b:
    ``"polarization"`` (rad), ``"time"`` (s), ``"frequency"`` (Hz), or
    ``"overlap"`` where the setting is the mode overlap itself.
    """

    mu_a: float
    mu_b: float
    bs: BeamSplitter = field(default_factory=BeamSplitter)
    d1: Detector = IDEAL
    d2: Detector = IDEAL
    scan: str = "polarization"
    pulse_a: GaussianPulse | None = None
    pulse_b: GaussianPulse | None = None

    def overlap(self, setting: float) -> float:
        if self.scan == "overlap":
            return check_overlap(setting)
        if self.pulse_a is None or self.pulse_b is None:
            raise DomainError(f"a {self.scan!r} scan needs both pulses")
        return overlap_for_setting(self.scan, self.pulse_a, self.pulse_b, setting)


@dataclass(frozen=True)
class CountRecord:
    setting: float
    trials: int
    coincidences: int
    singles_1: int
    singles_2: int

    def __post_init__(self):
        for name in ("coincidences", "singles_1", "singles_2"):
            value = getattr(self, name)
            if not 0 <= value <= self.trials:
                raise DomainError(f"{name}={value} outside [0, trials={self.trials}]")


def _chunk_counts(setup: HomSetup, overlap: float, n: int, seed: int, setting_index: int,
                  chunk_index: int):
    ss = np.random.SeedSequence(seed, spawn_key=(setting_index, chunk_index))
    rng = np.random.default_rng(ss)
    phi = rng.uniform(0.0, 2.0 * np.pi, n)
    i_c, i_d = output_intensities(phi, setup.mu_a, setup.mu_b, overlap, setup.bs)
    click_1 = rng.random(n) < setup.d1.click_for_mean(i_c)
    click_2 = rng.random(n) < setup.d2.click_for_mean(i_d)
    return (int(np.count_nonzero(click_1 & click_2)), int(np.count_nonzero(click_1)),
            int(np.count_nonzero(click_2)))


def sample_counts(setup: HomSetup, settings: Sequence[float], trials: int, seed: int,
                  workers: int = 1) -> list[CountRecord]:
    """Simulate ``trials`` pulse pairs per setting and count clicks."""
    if int(trials) != trials or trials < 1:
        raise DomainError(f"trials must be a positive integer, got {trials}")
    trials = int(trials)
    jobs = []
    for si, setting in enumerate(settings):
        lam = setup.overlap(float(setting))
        for ci, start in enumerate(range(0, trials, CHUNK)):
            jobs.append((si, lam, min(CHUNK, trials - start), ci))

    def run(job):
        si, lam, n, ci = job
        return si, _chunk_counts(setup, lam, n, seed, si, ci)

    totals = np.zeros((len(settings), 3), dtype=np.int64)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(job) for job in jobs]
    for si, counts in results:
        totals[si] += counts
    return [CountRecord(float(s), trials, *map(int, totals[i])) for i, s in enumerate(settings)]


# --------------------------------------------------------------------------
# fitting


@dataclass(frozen=True)
class _Model:
    name: str
    params: tuple[str, ...]
    func: Callable
    extrema: Callable  # params -> (low, high)
    scaled: tuple[str, ...]  # parameters carrying the units of y


def _sine(x, offset, amplitude, center):
    return offset - amplitude * np.cos(2.0 * (x - center))


def _cosine(x, offset, amplitude, center):
    return offset - amplitude * np.cos(x - center)


def _gaussian(x, baseline, depth, center, fwhm):
    return baseline - depth * np.exp(-FOUR_LN2 * (x - center) ** 2 / fwhm**2)


def _harmonic_extrema(p):
    return p[0] - abs(p[1]), p[0] + abs(p[1])


def _gaussian_extrema(p):
    return min(p[0], p[0] - p[1]), max(p[0], p[0] - p[1])


MODELS = {
    "sine": _Model("sine", ("offset", "amplitude", "center"), _sine, _harmonic_extrema,
                   ("offset", "amplitude")),
    "cosine": _Model("cosine", ("offset", "amplitude", "center"), _cosine, _harmonic_extrema,
                     ("offset", "amplitude")),
    "gaussian": _Model("gaussian", ("baseline", "depth", "center", "fwhm"), _gaussian,
                       _gaussian_extrema, ("baseline", "depth")),
}


@dataclass(frozen=True)
class FitResult:
    model: str
    params: dict
    errors: dict
    visibility: float
    visibility_error: float
    residual_rms: float

    def __getitem__(self, name):
        return self.params[name]


def _harmonic_guess(x, y, freq):
    # exact linear least squares in (offset, cos, sin) gives the starting point
    design = np.column_stack([np.ones_like(x), np.cos(freq * x), np.sin(freq * x)])
    (c0, a, b), *_ = np.linalg.lstsq(design, y, rcond=None)
    amplitude = math.hypot(a, b)
    center = math.atan2(-b, -a) / freq if amplitude > 0 else 0.0
    return [c0, amplitude, center]


def _gaussian_guess(x, y):
    median = float(np.median(y))
    dip = abs(y.min() - median) >= abs(y.max() - median)
    i = int(np.argmin(y) if dip else np.argmax(y))
    baseline = float(y.max() if dip else y.min())
    depth = baseline - float(y[i])
    return [baseline, depth, float(x[i]), float(np.ptp(x)) / 4.0 or 1.0]


def _jacobian(f, x, p):
    # central differences with an absolute step floor, so parameters near zero still move
    p = np.asarray(p, dtype=float)
    jac = np.empty((x.size, p.size))
    for i in range(p.size):
        h = 1e-6 * max(1.0, abs(p[i]))
        up, down = p.copy(), p.copy()
        up[i] += h
        down[i] -= h
        jac[:, i] = (f(x, *up) - f(x, *down)) / (2.0 * h)
    return jac


def _covariance(f, x, y, sigma, popt):
    """Parameter covariance scaled by the reduced chi-square of the weighted residuals."""
    w = np.ones_like(y) if sigma is None else 1.0 / np.asarray(sigma, dtype=float)
    jac = _jacobian(f, x, popt) * w[:, None]
    resid = (y - f(x, *popt)) * w
    s_sq = float(resid @ resid) / (x.size - popt.size)
    _, sv, vt = np.linalg.svd(jac, full_matrices=False)
    if sv[-1] <= np.finfo(float).eps * max(jac.shape) * sv[0]:
        return np.full((popt.size, popt.size), math.inf)
    return (vt.T / sv**2) @ vt * s_sq


def _visibility(model: _Model, p):
    lo, hi = model.extrema(p)
    return (hi - lo) / hi


def fit_arrays(x, y, model: str, sigma=None, fixed: dict | None = None,
               p0: Sequence[float] | None = None, maxfev: int = 20000) -> FitResult:
    """Levenberg-Marquardt fit of one of the named models to ``y(x)``.

    ``fixed`` pins parameters by name (e.g. ``{"center": 0.0}``). Standard
    errors come from the covariance scaled by the residual variance.
    """
    if model not in MODELS:
        raise DomainError(f"unknown model {model!r}; choose from {sorted(MODELS)}")
    form = MODELS[model]
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    # work on y / max|y| so tiny probabilities do not upset the Jacobian conditioning
    scale = float(np.max(np.abs(y))) if y.size and np.any(y) else 1.0
    y = y / scale
    if sigma is not None:
        sigma = np.asarray(sigma, dtype=float) / scale
    unit = {name: (scale if name in form.scaled else 1.0) for name in form.params}
    fixed = {k: v / unit.get(k, 1.0) for k, v in (fixed or {}).items()}
    unknown = set(fixed) - set(form.params)
    if unknown:
        raise DomainError(f"cannot fix unknown parameters {sorted(unknown)}")
    free = [p for p in form.params if p not in fixed]
    if x.size < len(free) + 1:
        raise DomainError(f"{model} fit needs at least {len(free) + 1} points, got {x.size}")

    if p0 is None:
        if model == "sine":
            p0 = _harmonic_guess(x, y, 2.0)
        elif model == "cosine":
            p0 = _harmonic_guess(x, y, 1.0)
        else:
            p0 = _gaussian_guess(x, y)
    else:
        p0 = [v / unit[name] for name, v in zip(form.params, p0)]
    start = dict(zip(form.params, p0))

    def full(free_values):
        values = dict(fixed)
        values.update(zip(free, free_values))
        return [values[p] for p in form.params]

    def f(xv, *free_values):
        return form.func(xv, *full(free_values))

    try:
        with warnings.catch_warnings():
            # the covariance is recomputed below; MINPACK's estimate is unreliable at zero residual
            warnings.simplefilter("ignore", OptimizeWarning)
            popt, _ = curve_fit(f, x, y, p0=[start[p] for p in free], sigma=sigma,
                                jac=lambda xv, *pv: _jacobian(f, xv, pv),
                                method="lm", maxfev=maxfev, xtol=1e-15, ftol=1e-15)
    except RuntimeError as exc:
        raise FitError(f"{model} fit did not converge: {exc}",
                       diagnostics={"p0": start, "points": int(x.size)}) from exc
    pcov = _covariance(f, x, y, sigma, popt)

    values = full(popt)
    if model == "gaussian":
        values[3] = abs(values[3])
    errs = dict.fromkeys(form.params, 0.0)
    for i, name in enumerate(free):
        errs[name] = float(np.sqrt(max(pcov[i, i], 0.0))) if np.isfinite(pcov[i, i]) else math.inf

    vis = _visibility(form, values)
    grad = np.zeros(len(free))
    for i in range(len(free)):
        h = 1e-7 * max(1.0, abs(popt[i]))
        up, down = popt.copy(), popt.copy()
        up[i] += h
        down[i] -= h
        grad[i] = (_visibility(form, full(up)) - _visibility(form, full(down))) / (2 * h)
    var = grad @ pcov @ grad if np.all(np.isfinite(pcov)) else math.inf
    vis_err = float(math.sqrt(max(var, 0.0)))
    resid = (y - form.func(x, *values)) * scale
    params = {name: float(v) * unit[name] for name, v in zip(form.params, values)}
    errs = {name: e * unit[name] for name, e in errs.items()}
    return FitResult(model, params, errs, float(vis), vis_err, float(np.sqrt(np.mean(resid**2))))


def fit_curve(records: Sequence[CountRecord], model: str, counts: str = "coincidences",
              fixed: dict | None = None) -> FitResult:
    """Fit count records, weighting each point by its Poisson counting error."""
    x = np.array([r.setting for r in records], dtype=float)
    y = np.array([getattr(r, counts) for r in records], dtype=float)
    sigma = np.sqrt(np.maximum(y, 1.0))
    return fit_arrays(x, y, model, sigma=sigma, fixed=fixed)
