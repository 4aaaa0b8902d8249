import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from errors import NotInvertible, ShapeError
from models import Subspace
from services.numerics import (
    containment_residual,
    invariant_closure,
    orthogonal_complement,
    orthonormal_basis,
    polar_decompose,
    psd_sqrt,
    rank,
    subspace_intersection,
    subspace_sum,
)


def _random(rng, rows, cols):
    return rng.uniform(-1, 1, (rows, cols)) + 1j * rng.uniform(-1, 1, (rows, cols))


def test_rank_ignores_tiny_singular_values():
    assert rank(np.diag([1.0, 1e-14, 0.0])) == 1
    assert rank(np.zeros((3, 2))) == 0
    assert rank(np.zeros((0, 4))) == 0


def test_orthonormal_basis_drops_repeated_columns():
    space = orthonormal_basis(np.array([[1.0, 1.0], [0.0, 0.0]]))
    assert space.dim == 1
    assert np.allclose(space.basis, [[1.0], [0.0]])


def test_orthonormal_basis_phases_are_reproducible():
    columns = np.array([[1j], [0.0]])
    assert np.allclose(orthonormal_basis(columns).basis, [[1.0], [0.0]])


def test_intersection_of_coordinate_planes():
    identity = np.eye(3, dtype=complex)
    U = Subspace(identity[:, :2])
    V = Subspace(identity[:, 1:])
    meet = subspace_intersection(U, V)
    assert meet.dim == 1
    assert np.allclose(np.abs(meet.basis[:, 0]), [0.0, 1.0, 0.0])


def test_intersection_with_zero_space_is_zero():
    assert subspace_intersection(Subspace.full(3), Subspace.zero(3)).dim == 0


def test_intersection_rejects_mismatched_ambient_spaces():
    with pytest.raises(ShapeError):
        subspace_intersection(Subspace.full(2), Subspace.full(3))


def test_complement_edge_cases():
    assert orthogonal_complement(Subspace.zero(4)).dim == 4
    assert orthogonal_complement(Subspace.full(4)).dim == 0
    line = Subspace(np.array([[1.0], [1.0]], dtype=complex) / np.sqrt(2))
    perp = orthogonal_complement(line)
    assert perp.dim == 1
    assert abs(np.vdot(line.basis[:, 0], perp.basis[:, 0])) < 1e-12


def test_sum_and_containment():
    identity = np.eye(3, dtype=complex)
    U = Subspace(identity[:, :1])
    V = Subspace(identity[:, 1:2])
    total = subspace_sum(U, V)
    assert total.dim == 2
    assert containment_residual(U, total) < 1e-12
    assert containment_residual(total, U) > 0.5


def test_invariant_closure_follows_shift():
    shift = np.diag(np.ones(2), -1).astype(complex)
    start = np.array([[1.0], [0.0], [0.0]], dtype=complex)
    assert invariant_closure(start, [shift]).dim == 3
    assert invariant_closure(start, []).dim == 1
    # e3 is an eigenvector of the lower shift (eigenvalue 0)
    assert invariant_closure(np.array([[0.0], [0.0], [1.0]]), [shift]).dim == 1


def test_psd_sqrt_squares_back():
    rng = np.random.default_rng(3)
    A = _random(rng, 4, 4)
    P = A.conj().T @ A
    root = psd_sqrt(P)
    assert np.allclose(root @ root, P, atol=1e-10)
    assert np.allclose(root, root.conj().T)


@seed(7)
@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 4), state=st.integers(0, 2**32 - 1))
def test_polar_decomposition_properties(n, state):
    rng = np.random.default_rng(state)
    # diagonally dominant, hence invertible
    T = _random(rng, n, n) + 6 * np.eye(n)
    W, absT = polar_decompose(T)
    identity = np.eye(n)
    assert np.allclose(W.conj().T @ W, identity, atol=1e-10)
    assert np.allclose(W @ absT, T, atol=1e-10)
    assert np.allclose(absT, absT.conj().T, atol=1e-12)
    assert np.all(np.linalg.eigvalsh(absT) > 0)


def test_polar_decomposition_preconditions():
    with pytest.raises(NotInvertible):
        polar_decompose(np.diag([1.0, 0.0]))
    with pytest.raises(ShapeError):
        polar_decompose(np.ones((2, 3)))
    W, absT = polar_decompose(np.zeros((0, 0)))
    assert W.shape == absT.shape == (0, 0)


def _unitary(rng, n):
    Q, _ = np.linalg.qr(_random(rng, n, n))
    return Q


def test_rank_is_unitarily_invariant():
    rng = np.random.default_rng(11)
    for _ in range(100):
        rows, cols = (int(d) for d in rng.integers(1, 7, size=2))
        r = int(rng.integers(0, min(rows, cols) + 1))
        A = _random(rng, rows, r) @ _random(rng, r, cols)
        assert rank(_unitary(rng, rows) @ A @ _unitary(rng, cols)) == rank(A) == r


@seed(13)
@settings(max_examples=80, deadline=None)
@given(
    n=st.integers(1, 6),
    shared=st.integers(0, 3),
    p=st.integers(0, 3),
    q=st.integers(0, 3),
    state=st.integers(0, 2**32 - 1),
)
def test_intersection_and_sum_dimensions_add_up(n, shared, p, q, state):
    rng = np.random.default_rng(state)
    common = _random(rng, n, shared)
    U = orthonormal_basis(np.hstack([common, _random(rng, n, p)]))
    V = orthonormal_basis(np.hstack([common, _random(rng, n, q)]))
    assert subspace_intersection(U, V).dim + subspace_sum(U, V).dim == U.dim + V.dim


def test_polar_round_trip_on_random_invertible_matrices():
    rng = np.random.default_rng(17)
    for _ in range(500):
        n = int(rng.integers(1, 9))
        s = rng.uniform(1e-3, 1.0, n)
        s[0] = 1e-3
        T = _unitary(rng, n) @ np.diag(s) @ _unitary(rng, n)
        W, absT = polar_decompose(T)
        assert np.linalg.norm(W @ absT - T) <= 1e-8
        assert np.linalg.norm(W.conj().T @ W - np.eye(n)) <= 1e-8
