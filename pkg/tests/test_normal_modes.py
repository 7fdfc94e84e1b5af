import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from catbranch.errors import DimensionMismatch, NegativeEigenvalue
from catbranch.normal_modes import basis_for, eigendecompose, from_modes, jacobi_eigh, mass_weighted, to_modes


def test_mass_weighted_examples(weak):
    k = 1.3
    V = np.array([[k, -k], [-k, k]])
    np.testing.assert_array_equal(mass_weighted(V, [1, 1]), V)
    np.testing.assert_array_equal(mass_weighted([[4.0]], [4.0]), [[1.0]])
    W = mass_weighted(weak.potential, weak.network.masses)
    assert W[0, 0] == pytest.approx(2.53174 / 1.5, rel=1e-14)
    assert np.array_equal(W, W.T)


def test_mass_weighted_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        mass_weighted(np.eye(2), [1.0])


def test_diagonal_matrix():
    b = eigendecompose(np.diag([9.0, 1.0, 4.0]))
    np.testing.assert_allclose(b.omega2, [1, 4, 9])
    np.testing.assert_allclose(np.abs(b.O), np.eye(3)[:, [1, 2, 0]])


def test_classic_pair():
    b = eigendecompose([[2.0, -1.0], [-1.0, 2.0]])
    np.testing.assert_allclose(b.omega2, [1.0, 3.0], atol=1e-15)
    s = 1 / np.sqrt(2)
    np.testing.assert_allclose(np.abs(b.O[:, 0]), [s, s], atol=1e-15)
    np.testing.assert_allclose(np.abs(b.O[:, 1]), [s, s], atol=1e-15)
    assert b.O[0, 1] * b.O[1, 1] < 0


def test_weak_preset_residual_and_char_poly(weak):
    W = mass_weighted(weak.potential, weak.network.masses)
    b = eigendecompose(W, weak.network.masses)
    assert np.abs(b.O.T @ b.O - np.eye(3)).max() <= 1e-12
    assert np.abs(b.O.T @ W @ b.O - np.diag(b.omega2)).max() <= 1e-12
    for w2 in b.omega2:
        assert abs(np.linalg.det(W - w2 * np.eye(3))) <= 1e-10
    assert list(b.omega2) == sorted(b.omega2)


def test_sign_convention_and_determinism(weak):
    b1 = basis_for(weak.network)
    b2 = basis_for(weak.network)
    assert np.array_equal(b1.O, b2.O) and np.array_equal(b1.omega2, b2.omega2)
    for k in range(3):
        col = b1.O[:, k]
        assert col[np.argmax(np.abs(col))] > 0


def test_negative_eigenvalue():
    with pytest.raises(NegativeEigenvalue):
        eigendecompose([[1.0, 2.0], [2.0, 1.0]])


def test_free_mode_flag():
    b = eigendecompose([[1.0, -1.0], [-1.0, 1.0]])
    assert b.free_mode == (True, False)


def test_to_from_modes(weak, rng):
    b = basis_for(weak.network)
    assert not to_modes(np.zeros(3), b).any()
    unit = eigendecompose(np.diag([1.0, 2.0, 3.0]))
    x = rng.normal(size=3)
    np.testing.assert_allclose(to_modes(x, unit), x)
    for _ in range(10):
        x = rng.normal(size=3) + 1j * rng.normal(size=3)
        np.testing.assert_allclose(from_modes(to_modes(x, b), b), x, rtol=0, atol=1e-12)
    with pytest.raises(DimensionMismatch):
        to_modes(np.zeros(2), b)


def test_energy_invariance(weak, rng):
    b = basis_for(weak.network)
    m = np.asarray(weak.network.masses)
    for _ in range(20):
        x, v = rng.normal(size=3), rng.normal(size=3)
        e_particles = 0.5 * np.sum(m * v**2) + 0.5 * x @ weak.potential @ x
        q, qd = to_modes(x, b), to_modes(v, b)
        e_modes = np.sum(0.5 * qd**2 + 0.5 * b.omega2 * q**2)
        assert e_modes == pytest.approx(e_particles, rel=1e-10)


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, (5, 5), elements=st.floats(-10, 10)), st.integers(1, 5))
def test_jacobi_reconstructs_random_symmetric(a, n):
    W = a[:n, :n] + a[:n, :n].T
    vals, vecs = jacobi_eigh(W)
    assert np.abs(vecs @ np.diag(vals) @ vecs.T - W).max() <= 1e-11 * max(1.0, np.abs(W).max())
    assert np.abs(vecs.T @ vecs - np.eye(n)).max() <= 1e-12
