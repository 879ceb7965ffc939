"""Declarative experiment descriptions.

Configs are YAML documents whose numeric keys carry their unit in the name
(``duration_fwhm_ns``, ``bandwidth_mhz``, ...). The dataclasses below keep
the values in those units so a config echoed to JSON re-parses to an equal
object; the ``to_*`` helpers convert to SI domain objects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .detect import Detector
from .errors import ConfigError, DomainError
from .hom import GaussianPulse
from .afcmem import AfcMemory
from .photonstat import COHERENT, FOCK, SourcePulse, TruncationPolicy
from .splitter import BeamSplitter

NS = 1e-9
MHZ = 1e6

SWEEP_UNITS = {
    "polarization": "deg",
    "time": "ns",
    "frequency": "mhz",
    "storage_time": "ns",
    "afc_bandwidth": "mhz",
    "bsm_phase": "deg",
    "bsm_basis": "deg",
}
_TO_SI = {"deg": math.pi / 180.0, "ns": NS, "mhz": MHZ}
MONTE_CARLO_KINDS = ("polarization", "time", "frequency", "bsm_phase")

_REQUIRED = object()


# --------------------------------------------------------------------------
# dataclasses


@dataclass(frozen=True)
class SourceConfig:
    kind: str = COHERENT
    mean_photons: float = 0.0
    path_transmission: float = 1.0
    duration_fwhm_ns: float = 8.0
    carrier_offset_mhz: float = 0.0
    arrival_time_ns: float = 0.0
    polarization_deg: float = 0.0

    def to_pulse(self) -> GaussianPulse:
        return GaussianPulse(self.duration_fwhm_ns * NS, self.carrier_offset_mhz * MHZ,
                             self.arrival_time_ns * NS, math.radians(self.polarization_deg))

    def to_source(self, mean_photons: float | None = None) -> SourcePulse:
        mean = self.mean_photons if mean_photons is None else mean_photons
        if self.kind == FOCK:
            return SourcePulse.fock(int(round(mean)))
        return SourcePulse.coherent(mean)


@dataclass(frozen=True)
class MemoryConfig:
    active: bool = True
    bandwidth_mhz: float = 600.0
    peak_efficiency: float = 1.0
    storage_time_ns: float | None = None
    tooth_spacing_mhz: float | None = None
    decoherence_time_ns: float = math.inf
    coupling_transmission: float = 1.0
    inactive_optical_depth: float = 0.0
    fidelity: float = 1.0

    @property
    def tooth_spacing_hz(self) -> float:
        if self.tooth_spacing_mhz is not None:
            return self.tooth_spacing_mhz * MHZ
        return 1.0 / (self.storage_time_ns * NS)

    def to_memory(self) -> AfcMemory:
        return AfcMemory(self.tooth_spacing_hz, self.bandwidth_mhz * MHZ, self.peak_efficiency,
                         self.decoherence_time_ns * NS, self.coupling_transmission, self.active,
                         self.inactive_optical_depth)


@dataclass(frozen=True)
class SweepConfig:
    kind: str
    grid: tuple[float, ...]
    trials: int | None = None
    seed: int | None = None

    @property
    def unit(self) -> str:
        return SWEEP_UNITS[self.kind]

    def grid_si(self) -> np.ndarray:
        return np.asarray(self.grid, dtype=float) * _TO_SI[self.unit]


@dataclass(frozen=True)
class ExperimentConfig:
    source_a: SourceConfig
    source_b: SourceConfig
    sweep: SweepConfig
    memory_a: MemoryConfig | None = None
    memory_b: MemoryConfig | None = None
    reflectance: float = 0.5
    detectors: tuple[Detector, Detector] = (Detector(), Detector())
    truncation: TruncationPolicy = field(default_factory=TruncationPolicy)
    balance_mu_at_bs: float | None = None
    name: str = "experiment"

    def beamsplitter(self) -> BeamSplitter:
        return BeamSplitter.from_reflectance(self.reflectance)

    def to_dict(self) -> dict:
        """Plain mapping in the config-file layout (JSON-safe)."""
        def clean(value):
            if isinstance(value, float) and math.isinf(value):
                return "inf" if value > 0 else "-inf"
            return value

        def section(obj, skip_none=True):
            out = {}
            for key, value in vars(obj).items():
                if value is None and skip_none:
                    continue
                out[key] = clean(value)
            return out

        sweep = {"kind": self.sweep.kind, f"grid_{self.sweep.unit}": list(self.sweep.grid)}
        if self.sweep.trials is not None:
            sweep["trials"] = self.sweep.trials
        if self.sweep.seed is not None:
            sweep["seed"] = self.sweep.seed
        out = {
            "name": self.name,
            "source_a": section(self.source_a),
            "source_b": section(self.source_b),
        }
        for key in ("memory_a", "memory_b"):
            mem = getattr(self, key)
            if mem is not None:
                out[key] = section(mem)
        out["beamsplitter"] = {"reflectance": self.reflectance}
        out["detectors"] = [{"eta": d.eta, "dark": d.dark} for d in self.detectors]
        out["truncation"] = {"epsilon": self.truncation.epsilon,
                             "hard_cap": self.truncation.hard_cap}
        if self.balance_mu_at_bs is not None:
            out["balance_mu_at_bs"] = self.balance_mu_at_bs
        out["sweep"] = sweep
        return out


# --------------------------------------------------------------------------
# line-tracking YAML reader


@dataclass
class _Node:
    value: object
    line: int


def _wrap(loader: yaml.SafeLoader, node) -> _Node:
    line = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        items = {}
        for key_node, value_node in node.value:
            key = loader.construct_object(key_node, deep=True)
            if not isinstance(key, str):
                raise ConfigError(f"keys must be strings, got {key!r}", key_node.start_mark.line + 1)
            if key in items:
                raise ConfigError(f"duplicate key {key!r}", key_node.start_mark.line + 1)
            child = _wrap(loader, value_node)
            child.key_line = key_node.start_mark.line + 1
            items[key] = child
        return _Node(items, line)
    if isinstance(node, yaml.SequenceNode):
        return _Node([_wrap(loader, n) for n in node.value], line)
    return _Node(loader.construct_object(node, deep=True), line)


def _compose(text: str) -> _Node:
    loader = yaml.SafeLoader(text)
    try:
        node = loader.get_single_node()
        if node is None:
            raise ConfigError("config is empty", 1)
        return _wrap(loader, node)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        problem = getattr(exc, "problem", None) or str(exc)
        raise ConfigError(f"malformed YAML: {problem}", mark.line + 1 if mark else None) from exc
    finally:
        loader.dispose()


def _real(node: _Node, key: str) -> float:
    value = node.value
    if isinstance(value, bool):
        raise ConfigError(f"{key}: expected a number, got {value!r}", node.line)
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            pass
    raise ConfigError(f"{key}: expected a number, got {value!r}", node.line)


def _integer(node: _Node, key: str) -> int:
    value = node.value
    if isinstance(value, bool):
        raise ConfigError(f"{key}: expected an integer, got {value!r}", node.line)
    if isinstance(value, int):
        return value
    number = _real(node, key)
    if not number.is_integer():
        raise ConfigError(f"{key}: expected an integer, got {value!r}", node.line)
    return int(number)


class _Section:
    def __init__(self, node: _Node, name: str):
        if not isinstance(node.value, dict):
            raise ConfigError(f"{name} must be a mapping", node.line)
        self.node = node
        self.name = name
        self.items: dict[str, _Node] = node.value
        self.used: set[str] = set()

    def line(self, key: str) -> int:
        return self.items[key].line if key in self.items else self.node.line

    def has(self, key: str) -> bool:
        return key in self.items

    def _take(self, key, default):
        self.used.add(key)
        if key not in self.items:
            if default is _REQUIRED:
                raise ConfigError(f"{self.name}: missing required key {key!r}", self.node.line)
            return None
        return self.items[key]

    def real(self, key, default=_REQUIRED, lo=-math.inf, hi=math.inf, lo_open=False,
             hi_open=False, finite=True):
        node = self._take(key, default)
        if node is None:
            return default
        value = _real(node, f"{self.name}.{key}")
        bad = (math.isnan(value) or (finite and math.isinf(value))
               or value < lo or value > hi
               or (lo_open and value == lo) or (hi_open and value == hi))
        if bad:
            left = "(" if lo_open else "["
            right = ")" if hi_open else "]"
            raise ConfigError(f"{self.name}.{key}={value:g} outside {left}{lo:g}, {hi:g}{right}",
                              node.line)
        return value

    def integer(self, key, default=_REQUIRED, lo=None):
        node = self._take(key, default)
        if node is None:
            return default
        value = _integer(node, f"{self.name}.{key}")
        if lo is not None and value < lo:
            raise ConfigError(f"{self.name}.{key}={value} must be >= {lo}", node.line)
        return value

    def boolean(self, key, default=_REQUIRED):
        node = self._take(key, default)
        if node is None:
            return default
        if not isinstance(node.value, bool):
            raise ConfigError(f"{self.name}.{key}: expected true or false", node.line)
        return node.value

    def string(self, key, default=_REQUIRED, choices=None):
        node = self._take(key, default)
        if node is None:
            return default
        if not isinstance(node.value, str):
            raise ConfigError(f"{self.name}.{key}: expected a string", node.line)
        if choices is not None and node.value not in choices:
            raise ConfigError(f"{self.name}.{key}={node.value!r}; choose from {list(choices)}",
                              node.line)
        return node.value

    def sub(self, key, default=_REQUIRED):
        node = self._take(key, default)
        return None if node is None else node

    def finish(self):
        for key, node in self.items.items():
            if key not in self.used:
                raise ConfigError(f"{self.name}: unknown key {key!r}",
                                  getattr(node, "key_line", node.line))


def _parse_source(node: _Node, name: str) -> SourceConfig:
    s = _Section(node, name)
    kind = s.string("kind", COHERENT, choices=(COHERENT, FOCK))
    mean = s.real("mean_photons", lo=0.0)
    if kind == FOCK and not float(mean).is_integer():
        raise ConfigError(f"{name}.mean_photons must be an integer for a fock source",
                          s.line("mean_photons"))
    cfg = SourceConfig(
        kind=kind,
        mean_photons=mean,
        path_transmission=s.real("path_transmission", 1.0, lo=0.0, hi=1.0, lo_open=True),
        duration_fwhm_ns=s.real("duration_fwhm_ns", 8.0, lo=0.0, lo_open=True),
        carrier_offset_mhz=s.real("carrier_offset_mhz", 0.0),
        arrival_time_ns=s.real("arrival_time_ns", 0.0),
        polarization_deg=s.real("polarization_deg", 0.0),
    )
    if kind == FOCK and cfg.path_transmission != 1.0:
        raise ConfigError(f"{name}: a fock source cannot pass a lossy path",
                          s.line("path_transmission"))
    s.finish()
    return cfg


def _parse_memory(node: _Node, name: str) -> MemoryConfig:
    s = _Section(node, name)
    if s.has("storage_time_ns") == s.has("tooth_spacing_mhz"):
        raise ConfigError(f"{name}: give exactly one of storage_time_ns or tooth_spacing_mhz",
                          node.line)
    cfg = MemoryConfig(
        active=s.boolean("active", True),
        bandwidth_mhz=s.real("bandwidth_mhz", lo=0.0, lo_open=True),
        peak_efficiency=s.real("peak_efficiency", lo=0.0, hi=1.0),
        storage_time_ns=s.real("storage_time_ns", None, lo=0.0, lo_open=True),
        tooth_spacing_mhz=s.real("tooth_spacing_mhz", None, lo=0.0, lo_open=True),
        decoherence_time_ns=s.real("decoherence_time_ns", math.inf, lo=0.0, lo_open=True,
                                   finite=False),
        coupling_transmission=s.real("coupling_transmission", 1.0, lo=0.0, hi=1.0),
        inactive_optical_depth=s.real("inactive_optical_depth", 0.0, lo=0.0),
        fidelity=s.real("fidelity", 1.0, lo=0.5, hi=1.0),
    )
    s.finish()
    return cfg


def _parse_grid(s: _Section, kind: str) -> tuple[float, ...]:
    unit = SWEEP_UNITS[kind]
    key = f"grid_{unit}"
    others = [k for k in s.items if k.startswith("grid") and k != key]
    if others:
        raise ConfigError(f"sweep of kind {kind!r} takes {key!r}, not {others[0]!r}",
                          s.line(others[0]))
    node = s.sub(key)
    if isinstance(node.value, list):
        grid = tuple(_real(item, f"sweep.{key}[{i}]") for i, item in enumerate(node.value))
        for i, value in enumerate(grid):
            if not math.isfinite(value):
                raise ConfigError(f"sweep.{key}[{i}] must be finite", node.value[i].line)
    elif isinstance(node.value, dict):
        g = _Section(node, f"sweep.{key}")
        start, stop = g.real("start"), g.real("stop")
        num = g.integer("num", lo=1)
        g.finish()
        grid = tuple(float(v) for v in np.linspace(start, stop, num))
    else:
        raise ConfigError(f"sweep.{key} must be a list or a start/stop/num mapping", node.line)
    if not grid:
        raise ConfigError(f"sweep.{key} is empty", node.line)
    diffs = np.diff(grid)
    if diffs.size and not (np.all(diffs > 0) or np.all(diffs < 0)):
        raise ConfigError(f"sweep.{key} must be strictly monotone", node.line)
    return grid


def _parse_sweep(node: _Node) -> SweepConfig:
    s = _Section(node, "sweep")
    kind = s.string("kind", choices=tuple(SWEEP_UNITS))
    grid = _parse_grid(s, kind)
    trials = s.integer("trials", None, lo=1)
    if trials is not None and kind not in MONTE_CARLO_KINDS:
        raise ConfigError(f"sweep kind {kind!r} has no Monte Carlo mode; drop 'trials'",
                          s.line("trials"))
    seed = s.integer("seed", None, lo=0)
    s.finish()
    if kind in ("afc_bandwidth", "storage_time") and any(v <= 0 for v in grid):
        raise ConfigError(f"sweep grid for {kind!r} must be positive", s.line(f"grid_{SWEEP_UNITS[kind]}"))
    if kind == "bsm_basis" and any(not 0.0 <= v <= 180.0 for v in grid):
        raise ConfigError("bsm_basis angles must lie in [0, 180] degrees", s.line("grid_deg"))
    return SweepConfig(kind, grid, trials, seed)


def _parse_detector(node: _Node, index: int) -> Detector:
    s = _Section(node, f"detectors[{index}]")
    det = Detector(s.real("eta", 1.0, lo=0.0, hi=1.0), s.real("dark", 0.0, lo=0.0, hi=1.0, hi_open=True))
    s.finish()
    return det


def parse_config(text: str, default_name: str = "experiment") -> ExperimentConfig:
    """Parse and validate a YAML experiment description."""
    root = _Section(_compose(text), "config")
    name = root.string("name", default_name)
    source_a = _parse_source(root.sub("source_a"), "source_a")
    source_b = _parse_source(root.sub("source_b"), "source_b")
    memories = {}
    for key, src in (("memory_a", source_a), ("memory_b", source_b)):
        node = root.sub(key, None)
        memories[key] = None if node is None else _parse_memory(node, key)
        if memories[key] is not None and src.kind == FOCK:
            raise ConfigError(f"{key}: a fock source cannot pass a memory", node.line)

    reflectance = 0.5
    bs_node = root.sub("beamsplitter", None)
    if bs_node is not None:
        bs = _Section(bs_node, "beamsplitter")
        reflectance = bs.real("reflectance", 0.5, lo=0.0, hi=1.0)
        bs.finish()

    detectors = (Detector(), Detector())
    det_node = root.sub("detectors", None)
    if det_node is not None:
        if not isinstance(det_node.value, list) or len(det_node.value) != 2:
            raise ConfigError("detectors must be a list of exactly two entries", det_node.line)
        detectors = tuple(_parse_detector(n, i) for i, n in enumerate(det_node.value))

    policy = TruncationPolicy()
    tr_node = root.sub("truncation", None)
    if tr_node is not None:
        tr = _Section(tr_node, "truncation")
        eps = tr.real("epsilon", policy.epsilon, lo=0.0, hi=1.0, lo_open=True, hi_open=True)
        cap = tr.integer("hard_cap", policy.hard_cap, lo=1)
        tr.finish()
        try:
            policy = TruncationPolicy(eps, cap)
        except DomainError as exc:
            raise ConfigError(str(exc), tr_node.line) from exc

    balance = root.real("balance_mu_at_bs", None, lo=0.0)
    sweep_node = root.sub("sweep")
    sweep = _parse_sweep(sweep_node)
    root.finish()

    mem_a, mem_b = memories["memory_a"], memories["memory_b"]
    active = [m for m in (mem_a, mem_b) if m is not None and m.active]
    if sweep.kind == "afc_bandwidth" and (mem_a is None):
        raise ConfigError("an afc_bandwidth sweep needs memory_a", sweep_node.line)
    if sweep.kind == "storage_time" and not active:
        raise ConfigError("a storage_time sweep needs at least one active memory", sweep_node.line)
    if sweep.kind in ("afc_bandwidth", "storage_time") and balance is None:
        raise ConfigError(f"a {sweep.kind} sweep needs balance_mu_at_bs", sweep_node.line)
    if sweep.trials is not None and FOCK in (source_a.kind, source_b.kind):
        raise ConfigError("Monte Carlo sweeps need coherent sources", sweep_node.line)
    if sweep.kind == "bsm_phase" and FOCK in (source_a.kind, source_b.kind):
        raise ConfigError("bsm_phase sweeps use the weak-pulse closed form; sources must be coherent",
                          sweep_node.line)
    if balance is not None and FOCK in (source_a.kind, source_b.kind):
        raise ConfigError("balance_mu_at_bs applies to coherent sources only", root.line("balance_mu_at_bs"))

    return ExperimentConfig(source_a, source_b, sweep, mem_a, mem_b, reflectance, detectors,
                            policy, balance, name)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_config(text, default_name=path.stem)


def config_from_dict(data: dict) -> ExperimentConfig:
    """Re-parse a mapping produced by :meth:`ExperimentConfig.to_dict`."""
    return parse_config(yaml.safe_dump(data, sort_keys=False))
