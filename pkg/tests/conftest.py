import numpy as np
import pytest
from hypothesis import settings

from multisir.model import ModelParams, State

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

# Lines printed by the acceptance module at the end of the run.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


def golden_params(**overrides):
    """n = m = 1 system with B_f = [[1, 1], [1, 0]] and unit healing rates."""
    kw = dict(beta=[[1.0]], beta_w=[[1.0]], c_w=[[1.0]], alpha=[[0.0]], gamma=[1.0], gamma_w=[1.0])
    kw.update(overrides)
    return ModelParams(**kw)


@pytest.fixture
def golden():
    return golden_params()


def random_params(rng, n=None, m=None, dense=True):
    n = n or int(rng.integers(1, 5))
    m = m or int(rng.integers(1, 4))
    fill = (lambda shape: rng.uniform(0.05, 1.0, shape)) if dense else (
        lambda shape: rng.uniform(0.05, 1.0, shape) * (rng.random(shape) < 0.6))
    alpha = rng.uniform(0.0, 2.0, (m, m))
    np.fill_diagonal(alpha, 0.0)
    if m > 1:
        alpha += np.roll(np.eye(m), 1, axis=1) * 0.1  # keep the flow graph strongly connected
    beta = fill((n, n)) + np.roll(np.eye(n), 1, axis=1) * 0.05
    return ModelParams(
        beta=beta,
        beta_w=fill((n, m)) + 0.01,
        c_w=fill((m, n)) + 0.01,
        alpha=alpha,
        gamma=rng.uniform(0.5, 3.0, n),
        gamma_w=rng.uniform(0.3, 1.0, m),
    )


def random_state(rng, params, positive=True):
    n, m = params.n, params.m
    s = rng.uniform(0.0, 1.0, n)
    x = rng.uniform(0.0, 1.0, n) * (1 - s)
    if positive:
        x = np.maximum(x, 1e-6)
        s = np.minimum(s, 1 - x)
    w = rng.uniform(1e-6 if positive else 0.0, 2.0, m)
    return State.from_sxw(s, x, w)
