"""Reproduction numbers: global R(t), distributed (pairwise) reproduction
numbers, local effective reproduction numbers and the effective reproduction
matrix.

Node indices run over the stacked node set: ``0..n-1`` are population nodes,
``n..n+m-1`` resource nodes.  Ratios whose denominator ``x_i`` (or ``w_j``) is
at most ``EPS_DEF`` are undefined and reported as NaN.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ModelParams, State, h_matrix
from .spectral import spectral_radius

EPS_DEF = 1e-12


def next_generation_product(params: ModelParams, s) -> np.ndarray:
    """``H(s) D_f^{-1} B_f`` assembled by matrix products."""
    d_inv = np.diag(1.0 / np.diag(params.d_f))
    return h_matrix(s, params.m) @ d_inv @ params.b_f


def global_R(params: ModelParams, state: State, *, start=None, return_vector=False):
    return spectral_radius(next_generation_product(params, state.s), start=start,
                           return_vector=return_vector)


def reproduction_matrix(params: ModelParams, state: State) -> np.ndarray:
    """Effective reproduction matrix built block by block from the unscaled
    DRNs.  Resource self-flow ``alpha[j, j]`` cancels in the dynamics and so
    contributes no self-DRN."""
    p = params
    n = p.n
    heal = p.resource_healing
    out = np.empty((p.size, p.size))
    scale = (state.s / p.gamma)[:, None]
    out[:n, :n] = scale * p.beta
    out[:n, n:] = scale * p.beta_w
    out[n:, :n] = p.c_w / heal[:, None]
    flow = p.alpha.T / heal[:, None]
    np.fill_diagonal(flow, 0.0)
    out[n:, n:] = flow
    return out


def _check_node(index, size):
    if not 0 <= index < size:
        raise IndexError(f"node index {index} out of range [0, {size})")


def drn_population(params: ModelParams, state: State, i: int, j: int) -> float:
    """DRN of population node ``i`` with respect to node ``j`` (either layer)."""
    p = params
    if not 0 <= i < p.n:
        raise IndexError(f"population index {i} out of range")
    _check_node(j, p.size)
    if state.x[i] <= EPS_DEF:
        return math.nan
    if j < p.n:
        incidence = p.beta[i, j] * state.x[j]
    else:
        incidence = p.beta_w[i, j - p.n] * state.w[j - p.n]
    return float(state.s[i] * incidence / (p.gamma[i] * state.x[i]))


def drn_infrastructure(params: ModelParams, state: State, j: int, k: int) -> float:
    """DRN of resource ``j`` (0-based within the resource layer) with respect
    to node ``k`` (stacked index)."""
    p = params
    if not 0 <= j < p.m:
        raise IndexError(f"resource index {j} out of range")
    _check_node(k, p.size)
    if state.w[j] <= EPS_DEF:
        return math.nan
    if k < p.n:
        incidence = p.c_w[j, k] * state.x[k]
    elif k - p.n == j:
        incidence = 0.0
    else:
        incidence = p.alpha[k - p.n, j] * state.w[k - p.n]
    return float(incidence / (p.resource_healing[j] * state.w[j]))


def drn(params: ModelParams, state: State, i: int, j: int) -> float:
    """DRN of any node ``i`` with respect to any node ``j`` (stacked indices)."""
    _check_node(i, params.size)
    if i < params.n:
        return drn_population(params, state, i, j)
    return drn_infrastructure(params, state, i - params.n, j)


def lern(params: ModelParams, state: State, i: int) -> float:
    """Local effective reproduction number: sum of node ``i``'s DRNs,
    population sources first."""
    total = 0.0
    for j in range(params.size):
        value = drn(params, state, i, j)
        if math.isnan(value):
            return math.nan
        total += value
    return total


def lern_vector(params: ModelParams, s, x, w) -> np.ndarray:
    """All LERNs at once from raw arrays; works row-wise on 2-D sample stacks."""
    p = params
    s, x, w = np.asarray(s, float), np.asarray(x, float), np.asarray(w, float)
    flow = p.alpha.T.copy()
    np.fill_diagonal(flow, 0.0)
    pop_in = s * (x @ p.beta.T + w @ p.beta_w.T)
    res_in = x @ p.c_w.T + w @ flow.T
    with np.errstate(divide="ignore", invalid="ignore"):
        pop = np.where(x > EPS_DEF, pop_in / (p.gamma * x), np.nan)
        res = np.where(w > EPS_DEF, res_in / (p.resource_healing * w), np.nan)
    return np.concatenate([pop, res], axis=-1)


def pairwise_infection_derivative(params: ModelParams, state: State, i: int, j: int, k: int) -> float:
    """Rate of change of node ``i``'s infected proportion when only population
    node ``j`` and resource ``k`` act as sources."""
    p = params
    return float(state.s[i] * (p.beta[i, j] * state.x[j] + p.beta_w[i, k] * state.w[k])
                 - p.gamma[i] * state.x[i])


@dataclass(frozen=True)
class ReproductionReport:
    t: float
    global_R: float
    matrix_R: np.ndarray
    lern: np.ndarray
    drn_defined: np.ndarray

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "global_R": self.global_R,
            "matrix_R": self.matrix_R.tolist(),
            "lern": [None if math.isnan(v) else float(v) for v in self.lern],
            "drn_defined": self.drn_defined.tolist(),
        }


def reproduction_report(params: ModelParams, state: State) -> ReproductionReport:
    mat = reproduction_matrix(params, state)
    lerns = lern_vector(params, state.s, state.x, state.w)
    return ReproductionReport(
        t=float(state.t),
        global_R=float(global_R(params, state)),
        matrix_R=mat,
        lern=lerns,
        drn_defined=~np.isnan(lerns),
    )
