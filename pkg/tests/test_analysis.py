import numpy as np
import pytest

from multisir.analysis import (IntegrityError, annotate, classify_equilibrium, find_global_peak,
                               run_theorem_suite, weighted_average_trace)
from multisir.integrator import IntegrationSettings, Trajectory, simulate
from multisir.model import State
from multisir.scenario import generate_scenario


@pytest.fixture(scope="module")
def seeded():
    sc = generate_scenario(seed=1)
    traj = simulate(sc.params, sc.initial, sc.settings)
    annotate(traj, sc.params)
    return sc, traj


def verdicts(reports):
    return {r.claim: r.verdict for r in reports}


def test_zero_trajectory_trace(golden):
    traj = simulate(golden, State.from_sxw([0.9], [0.0], [0.0]), IntegrationSettings(dt=0.01, t_end=1))
    assert np.all(weighted_average_trace(traj, golden, 0.5) == 0)


def test_healthy_trajectory_suite(golden):
    traj = simulate(golden, State.from_sxw([0.9], [0.0], [0.0]), IntegrationSettings(dt=0.01, t_end=1))
    for rep in run_theorem_suite(traj, golden):
        assert rep.verdict in ("holds", "not-applicable"), rep


def test_seeded_suite_holds(seeded):
    sc, traj = seeded
    v = verdicts(run_theorem_suite(traj, sc.params, sc.settings.record_interval))
    for claim in ("T1.i", "T1.iii", "T2", "L1", "L2", "L3", "T3", "C1", "P1"):
        assert v[claim] == "holds", claim


def test_peak_report(seeded):
    sc, traj = seeded
    pk = find_global_peak(traj, sc.params)
    assert pk.R0 > 1 and pk.tau_p is not None
    assert pk.agreement_gap <= 2 * sc.settings.record_interval
    trace = weighted_average_trace(traj, sc.params, pk.tau_p)
    assert traj.times[np.argmax(trace)] == pytest.approx(pk.weighted_average_peak_time)
    assert len(pk.per_node_peak_times) == sc.params.size
    assert len(pk.peak_lern_gap) == sc.params.n


def test_corollary_regime():
    sc = generate_scenario(seed=5)  # R(0) < 1 for this draw
    traj = simulate(sc.params, sc.initial, sc.settings)
    pk = find_global_peak(traj, sc.params)
    assert pk.R0 < 1 and pk.tau_p is None and pk.corollary_regime
    trace = weighted_average_trace(traj, sc.params, 0.0)
    assert np.all(np.diff(trace) < 0)


def test_decreasing_after_R_below_one(seeded):
    sc, traj = seeded
    k = int(np.flatnonzero(traj.scalars["R"] < 1)[0])
    trace = weighted_average_trace(traj, sc.params, traj.times[k])
    assert np.all(np.diff(trace[k:]) < 0)


def test_multiple_R_crossings_is_integrity_error(seeded):
    sc, traj = seeded
    bad = Trajectory(traj.times, traj.s, traj.x, traj.r, traj.w, scalars=dict(traj.scalars))
    R = bad.scalars["R"].copy()
    R[-5:] = 1.5
    bad.scalars["R"] = R
    with pytest.raises(IntegrityError):
        find_global_peak(bad, sc.params)
    assert verdicts(run_theorem_suite(bad, sc.params))["T1.i"] == "violated"


def test_fault_injection_flags_lemma1(seeded):
    sc, traj = seeded
    x = traj.x.copy()
    x[100] = -x[100]
    bad = Trajectory(traj.times, traj.s, x, traj.r, traj.w)
    reports = run_theorem_suite(bad, sc.params)
    l1 = next(r for r in reports if r.claim == "L1")
    assert l1.verdict == "violated" and l1.witnesses
    assert l1.witnesses[0]["t"] == pytest.approx(traj.times[100])


def test_classify_equilibrium(seeded):
    sc, traj = seeded
    assert classify_equilibrium(sc.params, State.from_sxw([0.3] * 10, [0.0] * 10, [0.0] * 5)) == "healthy"
    assert classify_equilibrium(sc.params, traj.state(len(traj) - 1)) == "healthy"
    mid = int(np.argmax(traj.x.max(axis=1)))
    assert classify_equilibrium(sc.params, traj.state(mid)) == "not-at-equilibrium"


def test_annotation_contents(seeded):
    sc, traj = seeded
    for key in ("R", "lambda_max", "v", "lern", "wavg"):
        assert len(traj.scalars[key]) == len(traj)
    # sign(lambda_max) = sign(R - 1) sample by sample
    R, lam = traj.scalars["R"], traj.scalars["lambda_max"]
    mask = np.abs(R - 1) > 1e-9
    assert np.array_equal(np.sign(lam[mask]), np.sign(R[mask] - 1))
