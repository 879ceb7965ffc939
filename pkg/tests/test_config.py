import math
from pathlib import Path

import pytest
import yaml

from homsim.acceptance import storage_configs
from homsim.config import config_from_dict, load_config, parse_config
from homsim.errors import ConfigError

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

BASE = """\
name: demo
source_a:
  mean_photons: 0.5
source_b:
  mean_photons: 0.5
detectors:
  - eta: 0.7
  - eta: 0.7
sweep:
  kind: polarization
  grid_deg: [0, 45, 90]
"""


def error_line(text):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    return info.value.line, str(info.value)


def test_minimal_config_parses():
    cfg = parse_config(BASE)
    assert cfg.name == "demo"
    assert cfg.sweep.grid == (0.0, 45.0, 90.0)
    assert cfg.sweep.grid_si()[1] == pytest.approx(math.pi / 4)
    assert cfg.detectors[0].eta == 0.7
    assert cfg.reflectance == 0.5


@pytest.mark.parametrize("old,new,line", [
    ("  - eta: 0.7\n  - eta: 0.7", "  - eta: 0.7\n  - eta: 1.5", 8),
    ("  mean_photons: 0.5\nsource_b", "  mean_photons: -1\nsource_b", 3),
    ("[0, 45, 90]", "[0, 90, 45]", 11),
    ("kind: polarization", "kind: spin", 10),
    ("name: demo", "name: demo\ncolour: red", 2),
])
def test_errors_carry_line_numbers(old, new, line):
    text = BASE.replace(old, new)
    assert text != BASE
    got, message = error_line(text)
    assert got == line
    assert message.startswith(f"line {line}: ")


def test_yaml_syntax_error_has_line():
    got, _ = error_line(BASE + "sweep: [unclosed\n")
    assert got is not None


def test_duplicate_key_rejected():
    got, message = error_line(BASE + "name: again\n")
    assert got == 12 and "duplicate" in message


def test_missing_section():
    got, message = error_line(BASE.replace("source_b:\n  mean_photons: 0.5\n", ""))
    assert "source_b" in message


def test_grid_mapping_form():
    cfg = parse_config(BASE.replace("grid_deg: [0, 45, 90]",
                                    "grid_deg: {start: 0, stop: 90, num: 7}"))
    assert cfg.sweep.grid == pytest.approx((0, 15, 30, 45, 60, 75, 90))


def test_wrong_grid_unit_rejected():
    _, message = error_line(BASE.replace("grid_deg", "grid_ns"))
    assert "grid_deg" in message


@pytest.mark.parametrize("extra", [
    "sweep:\n  kind: afc_bandwidth\n  grid_mhz: [10, 20]\n",
    "sweep:\n  kind: storage_time\n  grid_ns: [10, 20]\n",
    "sweep:\n  kind: bsm_basis\n  grid_deg: [0]\n  trials: 10\n",
])
def test_cross_checks(extra):
    text = BASE.split("sweep:")[0] + extra
    with pytest.raises(ConfigError):
        parse_config(text)


def test_fock_source_restrictions():
    fock = BASE.replace("source_a:\n  mean_photons: 0.5",
                        "source_a:\n  kind: fock\n  mean_photons: 1")
    parse_config(fock)
    with pytest.raises(ConfigError):
        parse_config(fock.replace("mean_photons: 1", "mean_photons: 1\n  path_transmission: 0.5"))
    with pytest.raises(ConfigError):
        parse_config(fock + "  trials: 100\n")
    with pytest.raises(ConfigError):
        parse_config(fock.replace("mean_photons: 1", "mean_photons: 1.5"))


def test_memory_needs_one_timing_key():
    text = BASE + "memory_a:\n  bandwidth_mhz: 600\n  peak_efficiency: 0.01\n"
    _, message = error_line(text)
    assert "storage_time_ns" in message
    ok = parse_config(text + "  tooth_spacing_mhz: 50\n")
    assert ok.memory_a.tooth_spacing_hz == pytest.approx(50e6)


def test_infinite_decoherence_round_trips():
    text = BASE + ("memory_a:\n  bandwidth_mhz: 600\n  peak_efficiency: 0.01\n"
                   "  storage_time_ns: 30\n  decoherence_time_ns: inf\n")
    cfg = parse_config(text)
    assert math.isinf(cfg.memory_a.decoherence_time_ns)
    assert config_from_dict(cfg.to_dict()) == cfg


@pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.yaml")), ids=lambda p: p.stem)
def test_shipped_configs_round_trip(path):
    cfg = load_config(path)
    assert config_from_dict(cfg.to_dict()) == cfg
    assert config_from_dict(yaml.safe_load(yaml.safe_dump(cfg.to_dict()))) == cfg


@pytest.mark.parametrize("name", ["no-storage", "single-storage", "double-storage"])
def test_storage_yaml_matches_built_in(name):
    from_file = load_config(CONFIGS / f"{name.replace('-', '_')}.yaml")
    assert from_file == storage_configs()[name]


def test_unreadable_file():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/file.yaml")
