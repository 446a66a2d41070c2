"""Trajectory-level analysis: derived traces, peak timing, equilibrium
classification and the threshold-claim checks."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .integrator import Trajectory, detect_crossings
from .model import ModelParams, State, h_matrix
from .reproduction import (EPS_DEF, lern_vector, next_generation_product,
                           reproduction_matrix)
from .spectral import dominant_metzler, spectral_radius

# Tolerances of the claim checks.
BOX_TOL = 1e-9
S_SLACK = 1e-9
R_SLACK = 1e-7
DERIV_TOL = 1e-8
PEAK_INTERVALS = 2
HEALTHY_TOL = 1e-3
STATIONARY_TOL = 1e-10
MAX_WITNESSES = 20


class IntegrityError(RuntimeError):
    """A trajectory contradicts a structural property it must have."""


@dataclass
class TheoremReport:
    claim: str
    verdict: str  # "holds", "violated" or "not-applicable"
    witnesses: list = field(default_factory=list)
    tolerances: dict = field(default_factory=dict)
    checked: int = 0
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "claim": self.claim,
            "verdict": self.verdict,
            "checked": self.checked,
            "tolerances": self.tolerances,
            "witnesses": self.witnesses,
            "note": self.note,
        }


@dataclass
class PeakReport:
    tau_p: float | None
    R0: float
    corollary_regime: bool
    weighted_average_peak_time: float
    agreement_gap: float | None
    per_node_peak_times: list
    per_node_lern_crossings: list
    # |R_i - 1| at each population node's interior peak (NaN at boundary peaks).
    peak_lern_gap: list

    def to_dict(self) -> dict:
        def clean(v):
            return None if v is None or (isinstance(v, float) and math.isnan(v)) else v

        return {
            "tau_p": clean(self.tau_p),
            "R0": self.R0,
            "corollary_regime": self.corollary_regime,
            "weighted_average_peak_time": self.weighted_average_peak_time,
            "agreement_gap": clean(self.agreement_gap),
            "per_node_peak_times": self.per_node_peak_times,
            "per_node_lern_crossings": self.per_node_lern_crossings,
            "peak_lern_gap": [clean(float(v)) for v in self.peak_lern_gap],
        }


def metzler_matrix(params: ModelParams, s) -> np.ndarray:
    """``H(s) B_f - D_f``, the Jacobian-like matrix of the infection layer."""
    return h_matrix(s, params.m) @ params.b_f - params.d_f


def _s_at(traj: Trajectory, tau: float) -> np.ndarray:
    times = traj.times
    if not times[0] <= tau <= times[-1]:
        raise ValueError(f"time {tau} outside trajectory span")
    k = int(np.searchsorted(times, tau, side="right")) - 1
    if k >= len(times) - 1:
        return traj.s[-1]
    frac = (tau - times[k]) / (times[k + 1] - times[k])
    return (1 - frac) * traj.s[k] + frac * traj.s[k + 1]


def left_vector_at(traj: Trajectory, params: ModelParams, tau: float) -> np.ndarray:
    """Normalized dominant left eigenvector at time ``tau`` (s linearly interpolated)."""
    return dominant_metzler(metzler_matrix(params, _s_at(traj, tau))).left_vector


def weighted_average_trace(traj: Trajectory, params: ModelParams, tau: float) -> np.ndarray:
    return traj.z @ left_vector_at(traj, params, tau)


def z_derivatives(traj: Trajectory, params: ModelParams) -> np.ndarray:
    """Analytic ``z'`` at every sample, one row per sample."""
    p = params
    force = traj.s * (traj.x @ p.beta.T + traj.w @ p.beta_w.T)
    dx = force - traj.x * p.gamma
    dw = traj.w @ (p.a_w - np.diag(p.gamma_w)).T + traj.x @ p.c_w.T
    return np.hstack([dx, dw])


def annotate(traj: Trajectory, params: ModelParams, record=("R", "lambda_max", "lern", "wavg"),
             anchor="peak") -> Trajectory:
    """Fill ``traj.scalars`` with R, lambda_max, the dominant left vectors
    (``"v"``), LERNs and the weighted average.  Eigen-solves along the
    trajectory are warm-started from the previous sample."""
    record = tuple(record)
    k_len = len(traj)
    R = np.empty(k_len)
    lam = np.empty(k_len)
    vs = np.empty((k_len, params.size))
    right = left = None
    for k in range(k_len):
        s = traj.s[k]
        R[k], right = spectral_radius(next_generation_product(params, s), start=right,
                                      return_vector=True)
        pair = dominant_metzler(metzler_matrix(params, s), start=left)
        lam[k], left = pair.value, pair.left_vector
        vs[k] = left
    traj.scalars["R"] = R
    traj.scalars["lambda_max"] = lam
    traj.scalars["v"] = vs
    traj.scalars["lern"] = lern_vector(params, traj.s, traj.x, traj.w)
    if anchor == "peak":
        down = [e for e in detect_crossings(traj, "R") if e.direction == "down"]
        tau = down[0].time if down else float(traj.times[0])
    else:
        tau = float(anchor)
    traj.meta["wavg_anchor"] = tau
    traj.scalars["wavg"] = weighted_average_trace(traj, params, tau)
    traj.meta["record"] = [name for name in ("R", "lambda_max", "lern", "wavg") if name in record]
    return traj


def _ensure(traj, params):
    if not all(name in traj.scalars for name in ("R", "lambda_max", "v", "lern")):
        annotate(traj, params, record=traj.meta.get("record", ("R", "lambda_max", "lern", "wavg")))


def find_global_peak(traj: Trajectory, params: ModelParams) -> PeakReport:
    _ensure(traj, params)
    R = traj.scalars["R"]
    events = detect_crossings(traj, "R")
    if len(events) > 1 or any(e.direction == "up" for e in events):
        raise IntegrityError(
            f"R crosses 1 {len(events)} times ({[e.direction for e in events]}); R must be non-increasing"
        )
    tau_p = events[0].time if events else None
    anchor = tau_p if tau_p is not None else float(traj.times[0])
    trace = weighted_average_trace(traj, params, anchor)
    t_peak = float(traj.times[int(np.argmax(trace))])
    z = traj.z
    peak_idx = np.argmax(z, axis=0)
    lern = traj.scalars["lern"]
    crossings = [[e.time for e in detect_crossings(traj, f"lern_{i + 1}")] for i in range(params.size)]
    gaps = []
    for i in range(params.n):
        k = int(peak_idx[i])
        interior = 0 < k < len(traj) - 1
        gaps.append(abs(lern[k, i] - 1.0) if interior else math.nan)
    return PeakReport(
        tau_p=tau_p,
        R0=float(R[0]),
        corollary_regime=bool(R[0] <= 1.0),
        weighted_average_peak_time=t_peak,
        agreement_gap=None if tau_p is None else abs(tau_p - t_peak),
        per_node_peak_times=[float(traj.times[k]) for k in peak_idx],
        per_node_lern_crossings=crossings,
        peak_lern_gap=gaps,
    )


def classify_equilibrium(params: ModelParams, state: State, tol: float = HEALTHY_TOL) -> str:
    if np.abs(state.x).max() < tol and np.abs(state.w).max(initial=0.0) < tol:
        return "healthy"
    return "not-at-equilibrium"


# ---------------------------------------------------------------- claim checks


def _report(claim, witnesses, checked, tolerances, note=""):
    verdict = "violated" if witnesses else ("holds" if checked else "not-applicable")
    return TheoremReport(claim, verdict, witnesses[:MAX_WITNESSES], tolerances, int(checked), note)


def _check_box(traj):
    wit = []
    for label, arr, hi in (("s", traj.s, True), ("x", traj.x, True), ("r", traj.r, True), ("w", traj.w, False)):
        bad = arr < -BOX_TOL
        if hi:
            bad |= arr > 1 + BOX_TOL
        for k, i in zip(*np.nonzero(bad)):
            wit.append({"t": float(traj.times[k]), "node": f"{label}_{i + 1}", "value": float(arr[k, i])})
    total = traj.s + traj.x + traj.r
    for k, i in zip(*np.nonzero(np.abs(total - 1) > BOX_TOL)):
        wit.append({"t": float(traj.times[k]), "node": f"sum_{i + 1}", "value": float(total[k, i])})
    return _report("L1", wit, traj.s.size + traj.w.size, {"box": BOX_TOL})


def _check_s_monotone(traj):
    diff = np.diff(traj.s, axis=0)
    wit = [{"t": float(traj.times[k + 1]), "node": f"s_{i + 1}", "increase": float(diff[k, i])}
           for k, i in zip(*np.nonzero(diff > S_SLACK))]
    return _report("L2", wit, diff.size, {"slack": S_SLACK})


def _check_R_monotone(traj):
    R = traj.scalars["R"]
    diff = np.diff(R)
    wit = [{"t": float(traj.times[k + 1]), "quantity": "R", "increase": float(diff[k])}
           for k in np.flatnonzero(diff > R_SLACK)]
    events = detect_crossings(traj, "R")
    if len(events) > 1 or any(e.direction == "up" for e in events):
        wit.append({"quantity": "R", "crossings": [(e.time, e.direction) for e in events]})
    return _report("T1.i", wit, diff.size, {"slack": R_SLACK})


def _check_local_weighted_sign(traj, params, zdot):
    # d/dt v(t_k)^T z at t = t_k has the sign of lambda_max(t_k), i.e. of R(t_k) - 1.
    R = traj.scalars["R"]
    rate = np.einsum("kj,kj->k", traj.scalars["v"], zdot)
    inc, dec = rate > DERIV_TOL, rate < -DERIV_TOL
    wit_ii = [{"t": float(traj.times[k]), "rate": float(rate[k]), "R": float(R[k])}
              for k in np.flatnonzero(inc & ~(R > 1))]
    wit_iv = [{"t": float(traj.times[k]), "rate": float(rate[k]), "R": float(R[k])}
              for k in np.flatnonzero(dec & ~(R < 1))]
    tol = {"derivative": DERIV_TOL}
    return (_report("T1.ii", wit_ii, inc.sum(), tol, "per-sample discretization"),
            _report("T1.iv", wit_iv, dec.sum(), tol, "per-sample discretization"))


def _check_peak(traj, params, record_interval):
    R = traj.scalars["R"]
    tol = {"intervals": PEAK_INTERVALS, "record_interval": record_interval}
    if R[0] <= 1:
        return _report("T1.iii", [], 0, tol, "R(0) <= 1: no interior peak")
    if not np.any(traj.z[0] > 0):
        return _report("T1.iii", [], 0, tol, "z(0) = 0: no epidemic")
    events = [e for e in detect_crossings(traj, "R") if e.direction == "down"]
    if len(events) != 1:
        return _report("T1.iii", [{"quantity": "R", "down_crossings": len(events)}], 1, tol)
    tau_p = events[0].time
    trace = weighted_average_trace(traj, params, tau_p)
    t_peak = float(traj.times[int(np.argmax(trace))])
    wit = []
    if abs(t_peak - tau_p) > PEAK_INTERVALS * record_interval + 1e-12:
        wit.append({"tau_p": tau_p, "argmax_time": t_peak})
    return _report("T1.iii", wit, 1, tol)


def _check_corollary(traj, params, zdot):
    R = traj.scalars["R"]
    below = np.flatnonzero(R < 1)
    tol = {"derivative": 0.0, "final": HEALTHY_TOL}
    if below.size == 0:
        return _report("C1", [], 0, tol, "R never below 1")
    k0 = int(below[0])
    v = traj.scalars["v"][k0]
    trace = traj.z[k0:] @ v
    rate = zdot[k0:] @ v
    wit = [{"t": float(traj.times[k0 + k]), "rate": float(rate[k])} for k in np.flatnonzero(rate >= 0)]
    wit += [{"t": float(traj.times[k0 + k + 1]), "increase": float(d)}
            for k, d in enumerate(np.diff(trace)) if d >= 0]
    if trace[-1] >= HEALTHY_TOL:
        wit.append({"t": float(traj.times[-1]), "final": float(trace[-1])})
    note = f"anchored at t={traj.times[k0]:.6g}"
    pos = trace > 0
    if pos.sum() >= 2:
        # least-squares slope of log(trace); reported only, no bound is asserted
        slope = np.polyfit(traj.times[k0:][pos], np.log(trace[pos]), 1)[0]
        note += f", empirical decay exponent {-slope:.4g}"
    return _report("C1", wit, trace.size, tol, note)


def _check_local_thresholds(traj, zdot):
    lern = traj.scalars["lern"]
    z = traj.z
    mask = (z > EPS_DEF) & (np.abs(zdot) > DERIV_TOL) & ~np.isnan(lern)
    bad = mask & (np.sign(zdot) != np.sign(lern - 1.0))
    n = traj.n
    wit = [{"t": float(traj.times[k]), "node": (f"x_{i + 1}" if i < n else f"w_{i - n + 1}"),
            "derivative": float(zdot[k, i]), "lern": float(lern[k, i])}
           for k, i in zip(*np.nonzero(bad))]
    return _report("T2", wit, mask.sum(), {"defined": EPS_DEF, "derivative": DERIV_TOL})


def pairwise_sign_mismatches(params: ModelParams, s, x, w, tol=DERIV_TOL):
    """Vectorized pairwise check over all ``(i, j, k)`` at one state.  Returns
    ``(checked, mismatches)`` where mismatches lists index triples."""
    p = params
    pop = s[:, None] * p.beta * x[None, :]          # (i, j)
    res = s[:, None] * p.beta_w * w[None, :]        # (i, k)
    heal = (p.gamma * x)[:, None, None]
    lhs = pop[:, :, None] + res[:, None, :] - heal
    with np.errstate(divide="ignore", invalid="ignore"):
        rhs = (pop[:, :, None] + res[:, None, :]) / heal - 1.0
    defined = np.broadcast_to((x > EPS_DEF)[:, None, None], lhs.shape)
    mask = defined & (np.abs(lhs) > tol) & (np.abs(rhs) > tol)
    bad = mask & (np.sign(lhs) != np.sign(rhs))
    return int(mask.sum()), [tuple(int(v) for v in idx) for idx in zip(*np.nonzero(bad))]


def _check_pairwise(traj, params):
    checked, wit = 0, []
    for k in range(len(traj)):
        c, bad = pairwise_sign_mismatches(params, traj.s[k], traj.x[k], traj.w[k])
        checked += c
        wit += [{"t": float(traj.times[k]), "ijk": list(t)} for t in bad]
    return _report("L3", wit, checked, {"defined": EPS_DEF, "magnitude": DERIV_TOL})


def _check_node_to_network(traj, params):
    lern = traj.scalars["lern"]
    checked, wit = 0, []
    for k in range(len(traj)):
        row = lern[k]
        if np.isnan(row).any():
            continue
        above, below = (row > 1).all(), (row < 1).all()
        if not (above or below):
            continue
        rho = spectral_radius(reproduction_matrix(params, traj.state(k)))
        checked += 1
        if (above and not rho > 1) or (below and not rho < 1):
            wit.append({"t": float(traj.times[k]), "rho": rho, "all_above": bool(above)})
    return _report("T3", wit, checked, {})


def _check_equilibrium(traj, params):
    final = traj.state(len(traj) - 1)
    verdict = classify_equilibrium(params, final)
    zdot = z_derivatives(traj, params)[-1]
    tol = {"healthy": HEALTHY_TOL, "stationary": STATIONARY_TOL}
    if verdict == "healthy":
        return _report("P1", [], 1, tol)
    if np.abs(zdot).max() < STATIONARY_TOL:
        return _report("P1", [{"t": float(traj.times[-1]), "max_z": float(final.z.max())}], 1, tol,
                       "stationary non-healthy state")
    return _report("P1", [], 0, tol, "horizon too short to reach equilibrium")


def run_theorem_suite(traj: Trajectory, params: ModelParams, record_interval: float | None = None) -> list:
    """Check every threshold claim against ``traj``; one report per claim."""
    if record_interval is None:
        record_interval = float(np.max(np.diff(traj.times))) if len(traj) > 1 else 0.0
    box = _check_box(traj)
    if box.verdict == "violated":
        # Derived quantities on a corrupted trajectory are meaningless.
        skipped = [TheoremReport(c, "not-applicable", note="skipped: L1 violated")
                   for c in ("L2", "T1.i", "T1.ii", "T1.iii", "T1.iv", "C1", "T2", "L3", "T3", "P1")]
        return [box] + skipped
    _ensure(traj, params)
    zdot = z_derivatives(traj, params)
    t1ii, t1iv = _check_local_weighted_sign(traj, params, zdot)
    return [
        box,
        _check_s_monotone(traj),
        _check_R_monotone(traj),
        t1ii,
        _check_peak(traj, params, record_interval),
        t1iv,
        _check_corollary(traj, params, zdot),
        _check_local_thresholds(traj, zdot),
        _check_pairwise(traj, params),
        _check_node_to_network(traj, params),
        _check_equilibrium(traj, params),
    ]


def violated(reports) -> list:
    return [r for r in reports if r.verdict == "violated"]
