import json
from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from zsl.config import EXPERIMENTS, ConfigError, ExperimentConfig, config_hash, parse_config, serialize, to_dict

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"


def _errors(text):
    with pytest.raises(ConfigError) as ei:
        parse_config(text)
    return ei.value.errors


def test_minimal_config_uses_defaults():
    cfg = parse_config("{}")
    assert cfg.grid.nx == 256 and cfg.sim.lam == 1.0 and cfg.experiment is None
    assert cfg == ExperimentConfig()


def test_lambda_alias():
    cfg = parse_config('{"sim": {"lambda": 4.0}}')
    assert cfg.sim.lam == 4.0
    assert to_dict(cfg)["sim"]["lambda"] == 4.0


def test_negative_lambda_names_field():
    errs = _errors('{"sim": {"lambda": -1}}')
    assert errs[0][0] == "sim.lambda"
    assert "greater than 0" in errs[0][1]


def test_unknown_key_lists_valid_keys():
    (path, reason), = _errors('{"grid": {"nx": 64, "nz": 3}}')
    assert path == "grid.nz"
    assert "unknown key" in reason and "Lx, Ly, nx, ny" in reason
    (path, reason), = _errors('{"bogus": 1}')
    assert path == "bogus" and "experiment" in reason and "hyperbolic" in reason


@pytest.mark.parametrize("text, where", [
    ('{"grid": {"nx": 63}}', "grid.nx"),
    ('{"sim": {"integrator": "euler"}}', "sim.integrator"),
    ('{"sweep": {"lambdas": [2, 1]}}', "sweep.lambdas"),
    ('{"scan": {"nu": [1.0]}}', "scan.nu"),
    ('{"scan": {"tau": [3, -3]}}', "scan.tau"),
    ('{"experiment": "other"}', "experiment"),
    ('{"output": {"norms_k": [9]}}', "output.norms_k"),
])
def test_field_errors(text, where):
    assert any(p == where for p, _ in _errors(text))


def test_cross_field_errors():
    assert _errors('{"energy_drift": {"ratio_min": 6}}')
    assert _errors('{"output": {"csv_stride": 10, "checkpoint_stride": 15}}')


@pytest.mark.parametrize("text", ["[1, 2]", "{not json", b"\xff\xfe", '"x"'])
def test_malformed_documents(text):
    (path, _), = _errors(text)
    assert path == ""


def test_shipped_configs_are_valid():
    for name in EXPERIMENTS:
        cfg = parse_config((CONFIG_DIR / f"{name}.json").read_bytes())
        assert cfg.experiment == name


cfgs = st.builds(
    lambda nx, lam, dt, amp, lams, seed, exp: parse_config(json.dumps({
        "experiment": exp, "grid": {"nx": nx, "ny": nx}, "sim": {"lambda": lam, "dt": dt},
        "initial": {"amplitude": amp}, "sweep": {"lambdas": lams}, "seed": seed,
    })),
    st.integers(4, 64).map(lambda k: 2 * k),
    st.floats(1e-3, 1e3), st.floats(1e-6, 1.0), st.floats(0, 10),
    st.lists(st.floats(0.1, 100), min_size=1, max_size=5, unique=True).map(sorted),
    st.integers(0, 2 ** 32 - 1), st.sampled_from(EXPERIMENTS),
)


@given(cfgs)
def test_serialize_round_trip(cfg):
    again = parse_config(serialize(cfg))
    assert again == cfg
    assert serialize(again) == serialize(cfg)
    assert config_hash(again) == config_hash(cfg)


def test_hash_sensitivity_and_key_order():
    a = parse_config('{"sim": {"dt": 0.001, "T": 1}, "seed": 1}')
    b = parse_config('{"seed": 1, "sim": {"T": 1.0, "dt": 1e-3}}')
    c = parse_config('{"seed": 2, "sim": {"T": 1.0, "dt": 1e-3}}')
    assert config_hash(a) == config_hash(b) != config_hash(c)
    assert len(config_hash(a)) == 64


def test_frozen():
    cfg = parse_config("{}")
    with pytest.raises(Exception):
        cfg.grid.nx = 8
