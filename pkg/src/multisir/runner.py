"""One-call pipeline: simulate a scenario, annotate it and run every check."""
from __future__ import annotations

from dataclasses import dataclass

from .analysis import (IntegrityError, PeakReport, annotate, find_global_peak,
                       run_theorem_suite)
from .integrator import Trajectory, simulate
from .model import AssumptionError, validate_params
from .reproduction import reproduction_report
from .scenario import Scenario

SERIES_EVERY = 50


@dataclass
class RunResult:
    scenario: Scenario
    trajectory: Trajectory
    theorems: list
    peak: PeakReport | None
    series: list

    @property
    def violations(self) -> list:
        return [r for r in self.theorems if r.verdict == "violated"]


def reproduction_series(traj: Trajectory, params, every: int = SERIES_EVERY) -> list:
    idx = list(range(0, len(traj), every))
    if idx[-1] != len(traj) - 1:
        idx.append(len(traj) - 1)
    return [reproduction_report(params, traj.state(k)) for k in idx]


def analyze_trajectory(scenario: Scenario, traj: Trajectory) -> RunResult:
    annotate(traj, scenario.params, scenario.record, scenario.wavg_anchor)
    theorems = run_theorem_suite(traj, scenario.params, scenario.settings.record_interval)
    try:
        peak = find_global_peak(traj, scenario.params)
    except IntegrityError:
        peak = None  # already reported as a T1.i violation
    return RunResult(scenario, traj, theorems, peak, reproduction_series(traj, scenario.params))


def run_scenario(scenario: Scenario) -> RunResult:
    problems = validate_params(scenario.params)
    if problems:
        raise AssumptionError(problems)
    traj = simulate(scenario.params, scenario.initial, scenario.settings)
    return analyze_trajectory(scenario, traj)
