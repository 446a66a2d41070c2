"""Parameters, state and right-hand side of the two-layer SIR model.

Population nodes carry SIR proportions ``(s, x, r)``; resource nodes carry a
pathogen concentration ``w``.  With ``z = (x, w)`` the infection dynamics read

    z' = (H(s) B_f - D_f) z,    H(s) = blockdiag(diag(s), I_m).

Matrix conventions (row = receiving node, column = source node):

* ``beta[i, j]``   rate at which population node j infects node i
* ``beta_w[i, k]`` rate at which resource k infects population node i
* ``c_w[j, k]``    shedding of population node k into resource j
* ``alpha[j, k]``  raw flow of pathogen from resource j to resource k
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .spectral import is_strongly_connected

SUM_TOL = 1e-9


class DimensionError(ValueError):
    """Raised when rate matrices do not match the declared sizes."""


class AssumptionError(ValueError):
    """Raised when parameters violate the model's standing assumptions."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("parameters violate: " + ", ".join(self.violations))


def _frozen(a, shape=None, name="array"):
    arr = np.array(a, dtype=float)
    if shape is not None and arr.shape != shape:
        raise DimensionError(f"{name}: expected shape {shape}, got {arr.shape}")
    arr.setflags(write=False)
    return arr


def assemble_blocks(beta, beta_w, c_w, alpha, gamma, gamma_w):
    """Build ``(A_w, B_f, D_f)`` from raw rates.

    ``A_w`` is laid out so that ``w' = -D_w w + A_w w + C_w x`` reproduces the
    per-resource balance: the coefficient of ``w_k`` in ``w_j'`` is
    ``alpha[k, j]`` and the diagonal is ``alpha[j, j] - sum_k alpha[j, k]``.
    """
    beta = np.asarray(beta, dtype=float)
    beta_w = np.asarray(beta_w, dtype=float)
    c_w = np.asarray(c_w, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    gamma_w = np.asarray(gamma_w, dtype=float)
    n, m = beta.shape[0], alpha.shape[0]

    a_w = alpha.T.copy()
    a_w[np.diag_indices(m)] = np.diag(alpha) - alpha.sum(axis=1)
    if not np.allclose(a_w.sum(axis=0), 0.0, atol=1e-12 * max(1.0, np.abs(alpha).max(initial=0.0))):
        raise AssertionError("column sums of A_w must vanish")

    diag_a = np.diag(a_w)
    b_f = np.zeros((n + m, n + m))
    b_f[:n, :n] = beta
    b_f[:n, n:] = beta_w
    b_f[n:, :n] = c_w
    b_f[n:, n:] = a_w - np.diag(diag_a)
    d_f = np.diag(np.concatenate([gamma, gamma_w - diag_a]))
    return a_w, b_f, d_f


@dataclass(frozen=True)
class ModelParams:
    beta: np.ndarray
    beta_w: np.ndarray
    c_w: np.ndarray
    alpha: np.ndarray
    gamma: np.ndarray
    gamma_w: np.ndarray
    n: int = field(init=False)
    m: int = field(init=False)
    a_w: np.ndarray = field(init=False, repr=False)
    b_f: np.ndarray = field(init=False, repr=False)
    d_f: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        gamma = np.atleast_1d(np.asarray(self.gamma, dtype=float))
        gamma_w = np.atleast_1d(np.asarray(self.gamma_w, dtype=float))
        n, m = gamma.shape[0], gamma_w.shape[0]
        if gamma.ndim != 1 or gamma_w.ndim != 1:
            raise DimensionError("gamma and gamma_w must be vectors")
        set_ = object.__setattr__
        set_(self, "gamma", _frozen(gamma))
        set_(self, "gamma_w", _frozen(gamma_w))
        set_(self, "beta", _frozen(self.beta, (n, n), "beta"))
        set_(self, "beta_w", _frozen(self.beta_w, (n, m), "beta_w"))
        set_(self, "c_w", _frozen(self.c_w, (m, n), "c_w"))
        set_(self, "alpha", _frozen(self.alpha, (m, m), "alpha"))
        set_(self, "n", n)
        set_(self, "m", m)
        a_w, b_f, d_f = assemble_blocks(
            self.beta, self.beta_w, self.c_w, self.alpha, self.gamma, self.gamma_w
        )
        set_(self, "a_w", _frozen(a_w))
        set_(self, "b_f", _frozen(b_f))
        set_(self, "d_f", _frozen(d_f))

    @property
    def size(self) -> int:
        return self.n + self.m

    @property
    def resource_healing(self) -> np.ndarray:
        """Total healing rate ``gamma_w - diag(A_w)`` of each resource."""
        return self.gamma_w - np.diag(self.a_w)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "beta": self.beta.tolist(),
            "beta_w": self.beta_w.tolist(),
            "c_w": self.c_w.tolist(),
            "alpha": self.alpha.tolist(),
            "gamma": self.gamma.tolist(),
            "gamma_w": self.gamma_w.tolist(),
        }


def validate_params(params: ModelParams) -> list[str]:
    """Return the names of all violated standing assumptions (empty if valid)."""
    p = params
    report = []
    if not np.all(p.gamma > 0):
        report.append("gamma positivity")
    for name in ("beta", "beta_w", "c_w", "alpha"):
        if np.any(getattr(p, name) < 0):
            report.append(f"{name} nonnegativity")
    if not np.all(p.resource_healing > 0):
        report.append("resource healing positivity")
    if not np.any(p.c_w > 0):
        report.append("c_w coupling")
    if not np.any(p.beta_w > 0):
        report.append("beta_w coupling")
    if not is_strongly_connected(p.beta > 0):
        report.append("B irreducible")
    # A_w's off-diagonal pattern is alpha transposed; strong connectivity is
    # invariant under transposition.
    if not is_strongly_connected(p.alpha > 0):
        report.append("A_w irreducible")
    return report


@dataclass(frozen=True)
class State:
    s: np.ndarray
    x: np.ndarray
    r: np.ndarray
    w: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        for name in ("s", "x", "r", "w"):
            object.__setattr__(self, name, _frozen(np.atleast_1d(getattr(self, name))))
        if not (self.s.shape == self.x.shape == self.r.shape):
            raise DimensionError("s, x and r must have equal length")

    @classmethod
    def from_sxw(cls, s, x, w, t=0.0) -> "State":
        s = np.asarray(s, dtype=float)
        x = np.asarray(x, dtype=float)
        return cls(s, x, 1.0 - s - x, w, t)

    @property
    def z(self) -> np.ndarray:
        return np.concatenate([self.x, self.w])

    def violations(self, tol: float = SUM_TOL) -> list[str]:
        out = []
        for name in ("s", "x", "r"):
            v = getattr(self, name)
            if np.any(v < -tol) or np.any(v > 1 + tol):
                out.append(f"{name} outside [0, 1]")
        if np.any(np.abs(self.s + self.x + self.r - 1.0) > tol):
            out.append("s + x + r != 1")
        if np.any(self.w < -tol):
            out.append("w negative")
        return out

    def check(self, params: ModelParams | None = None, tol: float = SUM_TOL) -> None:
        if params is not None and (self.s.shape[0] != params.n or self.w.shape[0] != params.m):
            raise DimensionError("state size does not match parameters")
        bad = self.violations(tol)
        if bad:
            raise ValueError("invalid state: " + ", ".join(bad))


class Derivative(NamedTuple):
    ds: np.ndarray
    dx: np.ndarray
    dr: np.ndarray
    dw: np.ndarray


def derivative(params: ModelParams, state: State) -> Derivative:
    p = params
    inflow = p.beta @ state.x + p.beta_w @ state.w
    ds = -state.s * inflow
    dr = p.gamma * state.x
    dx = state.s * inflow - dr
    dw = -p.gamma_w * state.w + p.a_w @ state.w + p.c_w @ state.x
    return Derivative(ds, dx, dr, dw)


def h_matrix(s, m: int) -> np.ndarray:
    return np.diag(np.concatenate([np.asarray(s, dtype=float), np.ones(m)]))


def derivative_compact(params: ModelParams, state: State) -> np.ndarray:
    """``z' = (H(s) B_f - D_f) z``, the stacked infection/contamination rate."""
    h = h_matrix(state.s, params.m)
    return (h @ params.b_f - params.d_f) @ state.z
