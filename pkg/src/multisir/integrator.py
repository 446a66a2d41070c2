"""Fixed-step RK4 integration, trajectory container and threshold crossings."""
from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np

from .model import ModelParams, State


class IntegrationError(RuntimeError):
    pass


@dataclass(frozen=True)
class IntegrationSettings:
    dt: float = 1e-3
    t_end: float = 15.0
    record_every: int = 10
    clamp_tolerance: float = 1e-9
    # Keep stepping past t_end until max|z| drops below this (None: stop at t_end).
    extend_until: float | None = None
    max_t_end: float = 500.0

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise ValueError("record_every must be an integer >= 1")
        if self.clamp_tolerance < 0:
            raise ValueError("clamp_tolerance must be nonnegative")

    @property
    def record_interval(self) -> float:
        return self.dt * self.record_every


@dataclass
class Trajectory:
    """Recorded samples, stored column-wise: ``s[k]`` is the susceptible
    vector at ``times[k]``.  Derived per-sample quantities go in ``scalars``
    (1-D arrays, or 2-D with one column per node for ``"lern"``)."""

    times: np.ndarray
    s: np.ndarray
    x: np.ndarray
    r: np.ndarray
    w: np.ndarray
    scalars: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        k = len(self.times)
        for name in ("s", "x", "r", "w"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.ndim != 2 or arr.shape[0] != k:
                raise ValueError(f"{name} must have one row per time stamp")
            setattr(self, name, arr)
        self.times = np.asarray(self.times, dtype=float)
        if k > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    def __len__(self):
        return len(self.times)

    @property
    def n(self) -> int:
        return self.s.shape[1]

    @property
    def m(self) -> int:
        return self.w.shape[1]

    @property
    def z(self) -> np.ndarray:
        return np.hstack([self.x, self.w])

    def state(self, k: int) -> State:
        return State(self.s[k], self.x[k], self.r[k], self.w[k], float(self.times[k]))

    def scalar(self, name: str) -> np.ndarray:
        """Look up a recorded scalar; ``lern_<i>`` (1-based) selects one LERN column."""
        if name in self.scalars:
            return np.asarray(self.scalars[name])
        if name.startswith("lern_") and "lern" in self.scalars:
            idx = int(name[5:]) - 1
            lern = np.asarray(self.scalars["lern"])
            if 0 <= idx < lern.shape[1]:
                return lern[:, idx]
        raise KeyError(f"unknown quantity {name!r}")


@dataclass(frozen=True)
class CrossingEvent:
    quantity: str
    time: float
    direction: str  # "down" or "up"
    level: float = 1.0


def rhs_operators(params: ModelParams):
    """Matrices for the stacked state ``y = (s, x, r, w)``: ``y' = L y`` plus the
    bilinear force ``s * (G y)`` moved from the s-block to the x-block."""
    n, m = params.n, params.m
    size = 3 * n + m
    g = np.zeros((n, size))
    g[:, n:2 * n] = params.beta
    g[:, 3 * n:] = params.beta_w
    lin = np.zeros((size, size))
    lin[n:2 * n, n:2 * n] = -np.diag(params.gamma)
    lin[2 * n:3 * n, n:2 * n] = np.diag(params.gamma)
    lin[3 * n:, n:2 * n] = params.c_w
    lin[3 * n:, 3 * n:] = params.a_w - np.diag(params.gamma_w)
    return g, lin


@numba.njit(cache=True)
def stacked_rhs(y, g, lin, n, out):
    size = y.shape[0]
    for i in range(size):
        acc = 0.0
        for j in range(size):
            acc += lin[i, j] * y[j]
        out[i] = acc
    for i in range(n):
        acc = 0.0
        for j in range(size):
            acc += g[i, j] * y[j]
        acc *= y[i]
        out[i] -= acc
        out[n + i] += acc


@numba.njit(cache=True)
def _renormalize(y, n):
    for i in range(n):
        total = y[i] + y[n + i] + y[2 * n + i]
        y[i] /= total
        y[n + i] /= total
        y[2 * n + i] /= total


@numba.njit(cache=True)
def _rk4_chunk(y, g, lin, n, dt, first_step, n_steps, every, tol):
    """Advance ``y`` in place by ``n_steps``.  Returns the recorded rows, their
    global step numbers and ``(fail_step, fail_index)`` (``-1`` when clean)."""
    size = y.shape[0]
    n_rec = (first_step + n_steps) // every - first_step // every
    rows = np.empty((n_rec, size))
    steps = np.empty(n_rec, dtype=np.int64)
    k1 = np.empty(size)
    k2 = np.empty(size)
    k3 = np.empty(size)
    k4 = np.empty(size)
    tmp = np.empty(size)
    rec = 0
    for step in range(first_step + 1, first_step + n_steps + 1):
        stacked_rhs(y, g, lin, n, k1)
        for i in range(size):
            tmp[i] = y[i] + 0.5 * dt * k1[i]
        stacked_rhs(tmp, g, lin, n, k2)
        for i in range(size):
            tmp[i] = y[i] + 0.5 * dt * k2[i]
        stacked_rhs(tmp, g, lin, n, k3)
        for i in range(size):
            tmp[i] = y[i] + dt * k3[i]
        stacked_rhs(tmp, g, lin, n, k4)
        clamped = False
        for i in range(size):
            y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            if y[i] < 0.0:
                if y[i] < -tol:
                    return rows[:rec], steps[:rec], step, i
                y[i] = 0.0
                clamped = True
        if clamped:
            _renormalize(y, n)
        if step % every == 0:
            _renormalize(y, n)
            rows[rec] = y
            steps[rec] = step
            rec += 1
    return rows[:rec], steps[:rec], -1, -1


def _names(n, m):
    return [f"{c}_{i + 1}" for c in "sxr" for i in range(n)] + [f"w_{j + 1}" for j in range(m)]


def simulate(params: ModelParams, initial: State, settings: IntegrationSettings | None = None) -> Trajectory:
    """Integrate from ``initial`` with classical RK4 at fixed step ``dt``.

    After each step, negative entries no larger in magnitude than
    ``clamp_tolerance`` are set to zero and ``s + x + r`` is renormalized;
    anything worse raises :class:`IntegrationError`.  With
    ``settings.extend_until`` set, the horizon grows in increments of
    ``t_end`` until ``max|z|`` falls below that level (or ``max_t_end``).
    """
    settings = settings or IntegrationSettings()
    n, m = params.n, params.m
    if initial.s.shape[0] != n or initial.w.shape[0] != m:
        raise ValueError("initial state does not match parameter sizes")
    s0, x0, w0 = initial.s, initial.x, initial.w
    if (np.any((s0 < 0) | (s0 > 1)) or np.any((x0 < 0) | (x0 > 1))
            or np.any(s0 + x0 > 1 + 1e-12) or np.any(w0 < 0)):
        raise ValueError("initial state needs s, x, s + x in [0, 1] and w >= 0")

    g, lin = rhs_operators(params)
    dt = float(settings.dt)
    every = int(settings.record_every)
    y = np.concatenate([s0, x0, 1.0 - s0 - x0, w0]).astype(float)
    t0 = float(initial.t)
    chunk = int(round(settings.t_end / dt))
    max_steps = max(int(round(settings.max_t_end / dt)), chunk)

    rows, steps = [y[None, :].copy()], [np.zeros(1, dtype=np.int64)]
    done = 0
    while True:
        recs, st, fail_step, fail_idx = _rk4_chunk(
            y, g, lin, n, dt, done, chunk, every, float(settings.clamp_tolerance)
        )
        rows.append(recs)
        steps.append(st)
        if fail_step >= 0:
            raise IntegrationError(
                f"step {fail_step} (t={t0 + fail_step * dt:.6g}): {_names(n, m)[fail_idx]} = "
                f"{y[fail_idx]:.3e} below -clamp_tolerance; try a smaller dt"
            )
        done += chunk
        if settings.extend_until is None or done >= max_steps:
            break
        if max(np.abs(y[n:2 * n]).max(), np.abs(y[3 * n:]).max()) < settings.extend_until:
            break
        chunk = min(chunk, max_steps - done)

    data = np.vstack(rows)
    return Trajectory(
        times=t0 + np.concatenate(steps) * dt,
        s=data[:, :n],
        x=data[:, n:2 * n],
        r=data[:, 2 * n:3 * n],
        w=data[:, 3 * n:],
        meta={"dt": dt, "record_every": every},
    )


def detect_crossings(trajectory: Trajectory, quantity: str, level: float = 1.0) -> list[CrossingEvent]:
    """Sign changes of ``quantity - level`` between consecutive samples, with the
    crossing time linearly interpolated.  Undefined (NaN) samples break the
    bracket and never produce an event."""
    values = trajectory.scalar(quantity)
    times = trajectory.times
    f = values - level
    events = []
    for k in range(len(f) - 1):
        a, b = f[k], f[k + 1]
        if np.isnan(a) or np.isnan(b):
            continue
        if a > 0 >= b:
            direction = "down"
        elif a < 0 <= b:
            direction = "up"
        else:
            continue
        t = times[k] + a / (a - b) * (times[k + 1] - times[k])
        events.append(CrossingEvent(quantity, float(t), direction, level))
    return events
