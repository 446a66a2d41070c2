import json

import numpy as np
import pytest

from multisir.export import read_trajectory, write_trajectory
from multisir.integrator import IntegrationSettings, simulate
from multisir.model import validate_params
from multisir.scenario import (GeneratorSpec, ScenarioError, generate_scenario, load_scenario,
                               save_scenario, scenario_from_dict)
from multisir.analysis import annotate


@pytest.mark.parametrize("seed", [0, 1, 7, 123456])
def test_generated_intervals(seed):
    sc = generate_scenario(seed=seed)
    p = sc.params
    assert (p.n, p.m) == (10, 5)
    assert np.all((1 <= p.gamma) & (p.gamma <= 3))
    assert np.all((0.6 <= p.gamma_w) & (p.gamma_w <= 0.75))
    assert np.all((0.01 <= p.beta) & (p.beta <= 0.338))
    assert np.all((0.01 <= p.beta_w) & (p.beta_w <= 0.2))
    assert np.allclose(p.c_w, p.beta_w.T - 0.01) and np.all(p.c_w >= 0)
    off = p.alpha[~np.eye(5, dtype=bool)]
    assert np.all((0 <= off) & (off <= 2)) and np.all(np.diag(p.alpha) == 0)
    assert np.all(sc.initial.s == 0.95) and np.allclose(sc.initial.x, 0.05)
    assert np.all(sc.initial.r == 0)
    assert np.all((0 <= sc.initial.w) & (sc.initial.w <= 1))
    assert validate_params(p) == []


def test_same_seed_same_scenario():
    a, b = generate_scenario(seed=42), generate_scenario(seed=42)
    assert a.digest() == b.digest()
    assert generate_scenario(seed=43).digest() != a.digest()


def test_degenerate_interval():
    spec = GeneratorSpec(n=3, m=2, gamma=(2.0, 2.0), beta=(0.2, 0.2))
    sc = generate_scenario(spec, seed=3)
    assert np.all(sc.params.gamma == 2.0) and np.all(sc.params.beta == 0.2)


def test_bad_interval():
    with pytest.raises(ScenarioError, match="gamma"):
        GeneratorSpec(gamma=(3.0, 1.0))


def test_scenario_file_roundtrip(tmp_path):
    sc = generate_scenario(seed=9)
    path = tmp_path / "sc.json"
    save_scenario(sc, path)
    again = load_scenario(path)
    assert again.digest() == sc.digest()


def test_generate_block(tmp_path):
    path = tmp_path / "gen.json"
    path.write_text(json.dumps({"generate": {"seed": 5, "intervals": {"gamma": [2, 2]}, "n": 4, "m": 2},
                                "t_end": 3}))
    sc = load_scenario(path)
    assert sc.params.n == 4 and np.all(sc.params.gamma == 2) and sc.settings.t_end == 3


def test_yaml_scenario(tmp_path):
    import yaml

    sc = generate_scenario(GeneratorSpec(n=2, m=1), seed=2)
    path = tmp_path / "sc.yaml"
    path.write_text(yaml.safe_dump(sc.to_dict()))
    assert load_scenario(path).digest() == sc.digest()


@pytest.mark.parametrize("mutate,field", [
    (lambda d: d.pop("beta"), "beta"),
    (lambda d: d.update(w0=[0.1]), "w0"),
    (lambda d: d.update(dt="fast"), "dt"),
    (lambda d: d.update(record=["bogus"]), "record"),
    (lambda d: d.update(beta_w=[[1.0]]), "beta_w"),
])
def test_malformed_scenarios_name_field(mutate, field):
    d = generate_scenario(GeneratorSpec(n=2, m=2), seed=1).to_dict()
    mutate(d)
    with pytest.raises(ScenarioError, match=field):
        scenario_from_dict(d)


@pytest.fixture(scope="module")
def short_run():
    sc = generate_scenario(seed=1)
    traj = simulate(sc.params, sc.initial, IntegrationSettings(dt=1e-3, t_end=2.0, record_every=20))
    annotate(traj, sc.params)
    return sc, traj


@pytest.mark.parametrize("fmt_name", ["csv", "json"])
def test_trajectory_roundtrip(tmp_path, short_run, fmt_name):
    _, traj = short_run
    traj.scalars["lern"][3, 2] = np.nan  # undefined entry
    path = write_trajectory(traj, tmp_path / f"t.{fmt_name}", fmt_name, ["R", "lambda_max", "lern", "wavg"])
    back = read_trajectory(path)
    for name in ("times", "s", "x", "r", "w"):
        np.testing.assert_allclose(getattr(back, name), getattr(traj, name), rtol=1e-11, atol=1e-300)
    for name in ("R", "lambda_max", "wavg"):
        np.testing.assert_allclose(back.scalars[name], traj.scalars[name], rtol=1e-11)
    np.testing.assert_allclose(back.scalars["lern"], traj.scalars["lern"], rtol=1e-11)
    assert np.isnan(back.scalars["lern"][3, 2])


def test_csv_header_and_minimal_schema(tmp_path, short_run):
    _, traj = short_run
    full = write_trajectory(traj, tmp_path / "a.csv", "csv", ["R", "lambda_max", "lern", "wavg"])
    header = full.read_text().splitlines()[0].split(",")
    expected = (["t"] + [f"{c}_{i}" for c in "sxr" for i in range(1, 11)] + [f"w_{j}" for j in range(1, 6)]
                + ["R", "lambda_max"] + [f"lern_{i}" for i in range(1, 16)] + ["wavg"])
    assert header == expected
    bare = write_trajectory(traj, tmp_path / "b.csv", "csv", [])
    assert bare.read_text().splitlines()[0].split(",") == expected[:36]
    assert "\r" not in bare.read_text()


def test_write_failure_names_path(tmp_path, short_run):
    _, traj = short_run
    with pytest.raises(OSError, match="nowhere"):
        write_trajectory(traj, tmp_path / "nowhere" / "t.csv")
