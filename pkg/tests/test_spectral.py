import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, strategies as st

from multisir.spectral import (ConvergenceError, dominant_metzler, is_strongly_connected,
                               spectral_radius)

PHI = (1 + math.sqrt(5)) / 2


def quadratic_root():
    # largest root of l^2 - l - 1 = 0
    a, b, c = 1.0, -1.0, -1.0
    return (-b + math.sqrt(b * b - 4 * a * c)) / (2 * a)


def test_golden_ratio_radius():
    assert spectral_radius([[1, 1], [1, 0]]) == pytest.approx(quadratic_root(), rel=1e-10)


def test_zero_matrix():
    assert spectral_radius(np.zeros((4, 4))) == 0.0


def test_nilpotent():
    assert spectral_radius([[0, 0], [1, 0]]) == 0.0


@pytest.mark.parametrize("c", [0.0, 0.3, 2.0, 17.5])
def test_scaled_identity(c):
    assert spectral_radius(c * np.eye(3)) == pytest.approx(c, rel=1e-12, abs=1e-15)


def test_periodic_irreducible():
    assert spectral_radius([[0, 2], [0.5, 0]]) == pytest.approx(1.0, rel=1e-10)


def test_rejects_negative():
    with pytest.raises(ValueError):
        spectral_radius([[1, -1], [0, 1]])


def test_nonconvergence_raises():
    with pytest.raises(ConvergenceError):
        spectral_radius(np.array([[1.0, 1.0], [1.0, 1.0]]) + [[0, 0], [0, 0.0001]], max_iter=1, rtol=0.0)


def test_golden_metzler():
    pair = dominant_metzler([[0, 1], [1, -1]])
    assert pair.value == pytest.approx((math.sqrt(5) - 1) / 2, abs=1e-12)
    expected = np.array([PHI, 1.0]) / (PHI + 1)
    assert np.allclose(pair.left_vector, expected, atol=1e-10)


def test_negative_identity():
    pair = dominant_metzler(-np.eye(4))
    assert pair.value == pytest.approx(-1.0, abs=1e-14)
    assert np.allclose(pair.left_vector, 0.25)


def _nonneg(seed, size=None, sparse=False):
    rng = np.random.default_rng(seed)
    size = size or int(rng.integers(2, 9))
    m = rng.uniform(0, 1, (size, size))
    if sparse:
        m *= rng.random((size, size)) < 0.5
        m += np.roll(np.eye(size), 1, axis=1)  # Hamiltonian cycle -> irreducible
    return m


@given(st.integers(0, 2**32 - 1), st.booleans())
def test_matches_dense_eigensolver(seed, sparse):
    m = _nonneg(seed, sparse=sparse)
    oracle = np.abs(np.linalg.eigvals(m)).max()
    assert spectral_radius(m) == pytest.approx(oracle, rel=1e-10)


@given(st.integers(0, 2**32 - 1))
def test_transpose_invariance(seed):
    m = _nonneg(seed, sparse=True)
    assert spectral_radius(m.T) == pytest.approx(spectral_radius(m), rel=1e-10)


@given(st.integers(0, 2**32 - 1))
def test_collatz_wielandt_sandwich(seed):
    rng = np.random.default_rng(seed)
    m = _nonneg(seed, sparse=True)
    z = rng.uniform(0.1, 2.0, m.shape[0])
    ratios = (m @ z) / z
    rho = spectral_radius(m)
    assert ratios.min() <= rho * (1 + 1e-12) and rho <= ratios.max() * (1 + 1e-12)


def _metzler(seed):
    rng = np.random.default_rng(seed)
    m = _nonneg(seed, sparse=True)
    m[np.diag_indices_from(m)] = rng.uniform(-5, 1, m.shape[0])
    return m


@given(st.integers(0, 2**32 - 1), st.floats(0.01, 10.0))
def test_shift_invariance(seed, a):
    m = _metzler(seed)
    p0 = dominant_metzler(m)
    p1 = dominant_metzler(m + a * np.eye(m.shape[0]))
    assert p1.value - p0.value == pytest.approx(a, abs=1e-10)
    assert np.allclose(p0.left_vector, p1.left_vector, atol=1e-8)


@given(st.integers(0, 2**32 - 1))
def test_metzler_residual_and_oracle(seed):
    m = _metzler(seed)
    pair = dominant_metzler(m)
    assert pair.residual <= 1e-8 * np.abs(m).sum(axis=1).max()
    assert np.all(pair.left_vector >= 0) and pair.left_vector.sum() == pytest.approx(1.0)
    assert pair.value == pytest.approx(np.linalg.eigvals(m).real.max(), abs=1e-9)


def test_strong_connectivity_examples():
    assert is_strongly_connected([[False]])
    assert is_strongly_connected([[0, 1], [1, 0]])
    assert not is_strongly_connected([[0, 1, 0], [0, 0, 1], [0, 0, 0]])


@given(st.integers(0, 2**32 - 1), st.floats(0.05, 0.6))
def test_strong_connectivity_matches_networkx(seed, density):
    rng = np.random.default_rng(seed)
    size = int(rng.integers(1, 9))
    pattern = rng.random((size, size)) < density
    g = nx.from_numpy_array(pattern.astype(int), create_using=nx.DiGraph)
    assert is_strongly_connected(pattern) == nx.is_strongly_connected(g)
