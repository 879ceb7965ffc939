"""Sweep execution, CSV/JSON emission and the command-line interface."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__
from .afcmem import balance_source_mu, pass_through
from .bsm import (MemoryChannel, TimeBinQubit, apply_memory_channel, bsm_phase_scan,
                  classical_quantum_bounds, psi_minus_probability_exact)
from .config import NS, ExperimentConfig, load_config
from .errors import ConfigError, HomsimError
from .hom import (GaussianPulse, detection_probabilities_exact, mode_overlap, overlap_for_setting,
                  overlap_samples_needed)
from .synth import HomSetup, fit_curve, sample_counts

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VALIDATION = 0, 2, 3, 4

ANALYTIC_HEADER = ("setting", "p_coincidence", "p_single_1", "p_single_2")
COUNT_HEADER = ("setting", "trials", "coincidences", "singles_1", "singles_2")
MEMORY_HEADER = ANALYTIC_HEADER + ("visibility",)
BSM_BASIS_HEADER = ("setting", "p_parallel", "p_orthogonal", "error_rate")
BSM_PHASE_HEADER = ("setting", "p_psi_minus")
BSM_COUNT_HEADER = ("setting", "trials", "projections")

FIT_MODELS = {"polarization": "sine", "time": "gaussian", "frequency": "gaussian"}


@dataclass(frozen=True)
class Arm:
    """One input arm as seen at the beam splitter."""

    pulse: GaussianPulse
    source_mu: float
    mu_at_bs: float
    transmission: float


def _arm(src, mem_cfg, target, storage_time=None, bandwidth=None):
    pulse = src.to_pulse()
    transmission = src.path_transmission
    if mem_cfg is not None:
        mem = mem_cfg.to_memory()
        if mem.active:
            if storage_time is not None:
                mem = mem.replace(tooth_spacing=1.0 / storage_time)
            if bandwidth is not None:
                mem = mem.replace(bandwidth=bandwidth)
        out, _ = pass_through(mem, pulse, 0.0)
        pulse = out.pulse
        transmission *= out.efficiency
    source_mu = src.mean_photons if target is None else balance_source_mu(target, [transmission])
    return Arm(pulse, source_mu, source_mu * transmission, transmission)


def prepare_arms(cfg: ExperimentConfig, storage_time: float | None = None,
                 bandwidth: float | None = None) -> tuple[Arm, Arm]:
    """Propagate both sources through their paths and memories.

    Pulse b is re-timed so that the relative delay configured at the sources
    survives any difference in memory delay. ``bandwidth`` applies to
    memory a only; ``storage_time`` to every active memory.
    """
    a = _arm(cfg.source_a, cfg.memory_a, cfg.balance_mu_at_bs, storage_time, bandwidth)
    b = _arm(cfg.source_b, cfg.memory_b, cfg.balance_mu_at_bs, storage_time, None)
    offset = cfg.source_b.arrival_time_ns * NS - cfg.source_a.arrival_time_ns * NS
    b = replace(b, pulse=b.pulse.replace(arrival_time=a.pulse.arrival_time + offset))
    return a, b


def _sources(cfg: ExperimentConfig, a: Arm, b: Arm):
    return cfg.source_a.to_source(a.mu_at_bs), cfg.source_b.to_source(b.mu_at_bs)


def _combined_fidelity(cfg: ExperimentConfig) -> float:
    # two independent flip channels compose to one with F = FaFb + (1-Fa)(1-Fb)
    f = 1.0
    for mem in (cfg.memory_a, cfg.memory_b):
        if mem is not None and mem.active:
            f = f * mem.fidelity + (1.0 - f) * (1.0 - mem.fidelity)
    return f


def _overlap(pa: GaussianPulse, pb: GaussianPulse) -> float:
    return mode_overlap(pa, pb, overlap_samples_needed(pa, pb))


# --------------------------------------------------------------------------
# per-point evaluation (module level so process pools can pickle it)


def evaluate_point(cfg: ExperimentConfig, index: int) -> tuple:
    kind = cfg.sweep.kind
    setting = float(cfg.sweep.grid_si()[index])
    bs = cfg.beamsplitter()
    d1, d2 = cfg.detectors
    policy = cfg.truncation

    if kind in ("polarization", "time", "frequency"):
        a, b = prepare_arms(cfg)
        lam = overlap_for_setting(kind, a.pulse, b.pulse, setting)
        return detection_probabilities_exact(*_sources(cfg, a, b), lam, bs, d1, d2, policy)

    if kind in ("storage_time", "afc_bandwidth"):
        if kind == "storage_time":
            a, b = prepare_arms(cfg, storage_time=setting)
        else:
            a, b = prepare_arms(cfg, bandwidth=setting)
        lam = _overlap(a.pulse, b.pulse)
        src_a, src_b = _sources(cfg, a, b)
        coinc, s1, s2 = detection_probabilities_exact(src_a, src_b, lam, bs, d1, d2, policy)
        orth, _, _ = detection_probabilities_exact(src_a, src_b, 0.0, bs, d1, d2, policy)
        vis = (orth - coinc) / orth if orth else math.nan
        return coinc, s1, s2, vis

    if kind == "bsm_basis":
        a, b = prepare_arms(cfg)
        src_a, src_b = _sources(cfg, a, b)
        q = TimeBinQubit(setting, 0.0)
        qo = q.orthogonal()

        def p(qa, qb):
            return psi_minus_probability_exact(qa, qb, src_a, src_b, d1, d2, policy, bs)

        p_par = 0.5 * (p(q, q) + p(qo, qo))
        p_orth = 0.5 * (p(q, qo) + p(qo, q))
        e = apply_memory_channel(p_par, p_orth, MemoryChannel(_combined_fidelity(cfg)))
        return p_par, p_orth, e

    raise ConfigError(f"sweep kind {kind!r} is not evaluated point by point")


def _map_points(cfg: ExperimentConfig, workers: int) -> list[tuple]:
    n = len(cfg.sweep.grid)
    if workers > 1 and n > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(evaluate_point, [cfg] * n, range(n)))
    return [evaluate_point(cfg, i) for i in range(n)]


# --------------------------------------------------------------------------
# sweeps


@dataclass
class SweepOutput:
    header: tuple[str, ...]
    rows: list[tuple]
    summary: dict


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _fit_summary(fit, visibility_key="visibility") -> dict:
    return {visibility_key: fit.visibility, f"{visibility_key}_error": fit.visibility_error,
            "fit": {"model": fit.model, "params": fit.params, "errors": fit.errors,
                    "residual_rms": fit.residual_rms}}


def _hom_sweep(cfg: ExperimentConfig, workers: int, seed: int) -> SweepOutput:
    kind = cfg.sweep.kind
    grid = cfg.sweep.grid
    if cfg.sweep.trials is None:
        values = _map_points(cfg, workers)
        rows = [(g, *v) for g, v in zip(grid, values)]
        coinc = np.array([v[0] for v in values])
        hi = float(coinc.max())
        vis = (hi - float(coinc.min())) / hi if hi > 0 else math.nan
        return SweepOutput(ANALYTIC_HEADER, rows,
                           {"visibility": vis, "visibility_error": 0.0, "method": "exact"})
    a, b = prepare_arms(cfg)
    d1, d2 = cfg.detectors
    setup = HomSetup(a.mu_at_bs, b.mu_at_bs, cfg.beamsplitter(), d1, d2, kind, a.pulse, b.pulse)
    records = sample_counts(setup, cfg.sweep.grid_si(), cfg.sweep.trials, seed, workers)
    rows = [(g, r.trials, r.coincidences, r.singles_1, r.singles_2) for g, r in zip(grid, records)]
    # fit in radians for polarization and in the config's units otherwise
    x = cfg.sweep.grid_si() if kind == "polarization" else np.asarray(grid, dtype=float)
    records = [replace(r, setting=float(xi)) for r, xi in zip(records, x)]
    fixed = None if kind == "polarization" else {"center": 0.0}
    summary = _fit_summary(fit_curve(records, FIT_MODELS[kind], fixed=fixed))
    summary["method"] = "monte_carlo"
    return SweepOutput(COUNT_HEADER, rows, summary)


def _memory_sweep(cfg: ExperimentConfig, workers: int) -> SweepOutput:
    values = _map_points(cfg, workers)
    rows = [(g, *v) for g, v in zip(cfg.sweep.grid, values)]
    vis = np.array([v[3] for v in values])
    summary = {"visibility": float(np.mean(vis)), "visibility_error": 0.0,
               "visibility_min": float(vis.min()), "visibility_max": float(vis.max()),
               "method": "exact"}
    return SweepOutput(MEMORY_HEADER, rows, summary)


def _bsm_phase_sweep(cfg: ExperimentConfig, seed: int) -> SweepOutput:
    a, b = prepare_arms(cfg)
    if not math.isclose(a.mu_at_bs, b.mu_at_bs, rel_tol=1e-9, abs_tol=0.0):
        raise ConfigError("bsm_phase sweeps need equal mean photon numbers at the splitter "
                          f"(got {a.mu_at_bs:.6g} and {b.mu_at_bs:.6g}); set balance_mu_at_bs")
    scan = bsm_phase_scan(a.mu_at_bs, cfg.sweep.grid_si(), cfg.sweep.trials,
                          seed if cfg.sweep.trials is not None else None)
    if cfg.sweep.trials is None:
        header = BSM_PHASE_HEADER
        rows = [(g, v) for g, v in zip(cfg.sweep.grid, scan.values)]
    else:
        header = BSM_COUNT_HEADER
        rows = [(g, cfg.sweep.trials, int(v)) for g, v in zip(cfg.sweep.grid, scan.values)]
    summary = _fit_summary(scan.fit)
    v, dv = scan.visibility, scan.fit.visibility_error
    summary["error_rate"] = scan.error_rate
    summary["error_rate_error"] = dv / (2.0 - v) ** 2
    summary["method"] = "closed_form" if cfg.sweep.trials is None else "monte_carlo"
    return SweepOutput(header, rows, summary)


def _bsm_basis_sweep(cfg: ExperimentConfig, workers: int) -> SweepOutput:
    values = _map_points(cfg, workers)
    rows = [(g, *v) for g, v in zip(cfg.sweep.grid, values)]
    rates = [v[2] for v in values]
    return SweepOutput(BSM_BASIS_HEADER, rows,
                       {"error_rate": float(np.mean(rates)), "error_rate_error": 0.0,
                        "error_rates": rates, "memory_fidelity": _combined_fidelity(cfg),
                        "method": "exact"})


def run_sweep(cfg: ExperimentConfig, workers: int = 1, seed: int | None = None) -> SweepOutput:
    """Evaluate the configured sweep; ``seed`` overrides the config's seed."""
    seed = seed if seed is not None else (cfg.sweep.seed if cfg.sweep.seed is not None else 0)
    kind = cfg.sweep.kind
    if kind in ("polarization", "time", "frequency"):
        out = _hom_sweep(cfg, workers, seed)
    elif kind in ("storage_time", "afc_bandwidth"):
        out = _memory_sweep(cfg, workers)
    elif kind == "bsm_phase":
        out = _bsm_phase_sweep(cfg, seed)
    else:
        out = _bsm_basis_sweep(cfg, workers)
    a, b = prepare_arms(cfg)
    out.summary.update({
        "sweep": kind,
        "source_mu": [a.source_mu, b.source_mu],
        "mu_at_bs": [a.mu_at_bs, b.mu_at_bs],
        "seed": seed,
        "version": __version__,
        "config": cfg.to_dict(),
    })
    return out


def csv_text(out: SweepOutput) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(out.header)
    for row in out.rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def write_outputs(out: SweepOutput, directory: Path, stem: str) -> tuple[Path, Path]:
    directory.mkdir(parents=True, exist_ok=True)
    csv_path = directory / f"{stem}.csv"
    json_path = directory / f"{stem}.json"
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(csv_text(out))
    summary = dict(out.summary, csv=csv_path.name)
    with open(json_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(summary, fh, indent=2, allow_nan=True)
        fh.write("\n")
    return csv_path, json_path


# --------------------------------------------------------------------------
# CLI


def _failing_module(exc: BaseException) -> str:
    module = "homsim"
    for frame in traceback.extract_tb(exc.__traceback__):
        path = Path(frame.filename)
        if path.parent.name == "homsim" and path.stem not in ("runner", "__init__"):
            module = f"homsim.{path.stem}"
    return module


def _cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"{args.config}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        out = run_sweep(cfg, workers=args.workers, seed=args.seed)
    except ConfigError as exc:
        print(f"{args.config}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except HomsimError as exc:
        print(f"numeric error in {_failing_module(exc)}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    csv_path, json_path = write_outputs(out, Path(args.out), cfg.name)
    key = "error_rate" if "error_rate" in out.summary and "visibility" not in out.summary else "visibility"
    print(f"{cfg.name}: {key} = {out.summary[key]:.6g} +/- {out.summary[key + '_error']:.2g}")
    print(f"wrote {csv_path} and {json_path}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    from .acceptance import run_all

    if args.config is not None:
        try:
            load_config(args.config)
        except ConfigError as exc:
            print(f"{args.config}: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print(f"{args.config}: config OK")
    results = run_all(epsilon=args.epsilon)
    for r in results:
        print(r.line())
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_VALIDATION if failed else EXIT_OK


def _cmd_bounds(_args) -> int:
    for name, value in classical_quantum_bounds().items():
        print(f"{name:14s} {value:.6f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="homsim", description=__doc__)
    parser.add_argument("--version", action="version", version=f"homsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the sweep described by a config file")
    run.add_argument("config")
    run.add_argument("--out", default=".", help="output directory (default: current)")
    run.add_argument("--workers", type=int, default=1, help="worker pool size")
    run.add_argument("--seed", type=int, default=None, help="override the config seed")
    run.set_defaults(func=_cmd_run)

    val = sub.add_parser("validate", help="run the cross-oracle acceptance checks")
    val.add_argument("--config", default=None, help="also parse and validate this config")
    val.add_argument("--epsilon", type=float, default=1e-14,
                     help="truncation epsilon for the oracle-equivalence check")
    val.set_defaults(func=_cmd_validate)

    bounds = sub.add_parser("bounds", help="print the memory bound table")
    bounds.set_defaults(func=_cmd_bounds)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "workers", 1) < 1:
        print("--workers must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
