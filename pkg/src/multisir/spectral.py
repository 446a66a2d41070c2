"""Perron-Frobenius machinery: spectral radii, dominant Metzler eigenpairs and
strong connectivity of sign patterns.

All eigenvalue routines are power iterations on a nonnegative matrix with a
residual-based stopping rule; no general eigen-solver is involved.
"""
from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

RTOL = 1e-13
MAX_ITER = 100_000
STALL_TOL = 1e-8


class ConvergenceError(RuntimeError):
    def __init__(self, message, residual):
        super().__init__(f"{message} (last residual {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True)
class DominantPair:
    value: float
    left_vector: np.ndarray
    iterations: int
    residual: float


def is_strongly_connected(pattern) -> bool:
    """True iff the digraph with an edge i -> j wherever ``pattern[i][j]`` is
    truthy is strongly connected.  Two depth-first searches from node 0, one on
    the graph and one on its transpose."""
    adj = np.asarray(pattern, dtype=bool)
    if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
        raise ValueError("pattern must be square")
    size = adj.shape[0]
    if size <= 1:
        return True

    def reaches_all(a):
        seen = np.zeros(size, dtype=bool)
        seen[0] = True
        stack = [0]
        while stack:
            u = stack.pop()
            for v in np.flatnonzero(a[u] & ~seen):
                seen[v] = True
                stack.append(int(v))
        return bool(seen.all())

    return reaches_all(adj) and reaches_all(adj.T)


@numba.njit(cache=True)
def _power(a, start, rtol, max_iter):
    """Power iteration on the nonnegative matrix ``a`` (acting on column
    vectors).  Returns ``(mu, v, iterations, residual, converged)`` with ``v``
    nonnegative and summing to one."""
    size = a.shape[0]
    v = start / start.sum()
    y = np.empty(size)
    best_mu, best_v, best_k, best_res = 0.0, v.copy(), 0, np.inf
    for k in range(1, max_iter + 1):
        mu = 0.0
        for i in range(size):
            acc = 0.0
            for j in range(size):
                acc += a[i, j] * v[j]
            y[i] = acc
            mu += acc
        if mu <= 0.0:
            return 0.0, v, k, 0.0, True
        res = 0.0
        ymax = 0.0
        for i in range(size):
            res = max(res, abs(y[i] - mu * v[i]))
            ymax = max(ymax, abs(y[i]))
        if res < best_res:
            best_mu, best_v, best_k, best_res = mu, v.copy(), k, res
        if res <= rtol * ymax:
            return mu, y / mu, k, res, True
        v = y / mu
    return best_mu, best_v, best_k, best_res, False


def _is_nilpotent(m):
    # A nonnegative matrix is nilpotent iff M^N 1 = 0.
    v = np.ones(m.shape[0])
    for _ in range(m.shape[0]):
        v = m @ v
        if not v.any():
            return True
        if (v > 0).all():
            return False
    return False


def spectral_radius(m, *, start=None, rtol=RTOL, max_iter=MAX_ITER, return_vector=False):
    """Spectral radius of a square nonnegative matrix.

    Iterates on ``M + delta I`` (``delta`` half the smaller of the max row and
    column sums) so that irreducible but periodic matrices still converge.
    ``start`` warm-starts the iteration, e.g. with the vector of a nearby
    matrix; pass ``return_vector=True`` to get the right Perron vector back.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("matrix must be square")
    if np.any(m < 0):
        raise ValueError("matrix must be entrywise nonnegative")
    size = m.shape[0]
    if size == 0 or _is_nilpotent(m):
        rho, vec = 0.0, np.full(size, 1.0 / max(size, 1))
        return (rho, vec) if return_vector else rho

    delta = 0.5 * min(m.sum(axis=1).max(), m.sum(axis=0).max())
    a = m + delta * np.eye(size)
    v0 = np.ones(size) if start is None else np.maximum(np.asarray(start, float), 0) + 1e-3 / size
    mu, vec, _, res, ok = _power(a, v0, rtol, int(max_iter))
    if not ok and res > STALL_TOL * max(np.abs(a).max(), 1.0):
        raise ConvergenceError("spectral_radius did not converge", res)
    rho = max(mu - delta, 0.0)
    return (rho, vec) if return_vector else rho


def dominant_metzler(m, *, start=None, rtol=RTOL, max_iter=MAX_ITER) -> DominantPair:
    """Rightmost eigenvalue of a Metzler matrix and its normalized left
    eigenvector (nonnegative, unit 1-norm)."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("matrix must be square")
    off = m - np.diag(np.diag(m))
    if np.any(off < 0):
        raise ValueError("matrix must be Metzler (nonnegative off-diagonal)")
    size = m.shape[0]
    shift = 1.0 + np.abs(np.diag(m)).max(initial=0.0)
    a = (m + shift * np.eye(size)).T
    v0 = np.ones(size) if start is None else np.maximum(np.asarray(start, float), 0) + 1e-3 / size
    mu, v, iters, _, ok = _power(np.ascontiguousarray(a), v0, rtol, int(max_iter))
    value = mu - shift
    residual = float(np.abs(v @ m - value * v).max())
    if not ok and residual > STALL_TOL * max(np.abs(m).sum(axis=1).max(), 1.0):
        raise ConvergenceError("dominant_metzler did not converge", residual)
    return DominantPair(float(value), v, iters, residual)
