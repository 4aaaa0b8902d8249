import logging
from typing import Sequence, Tuple, Union

import numpy as np
from scipy import linalg

from config import DEFAULT_POLICY, TolerancePolicy
from errors import NotInvertible, ShapeError
from models import ComplexMatrix, Subspace

logger = logging.getLogger(__name__)


def _rcond(shape: Tuple[int, ...], pol: TolerancePolicy) -> float:
    return pol.rank_rtol * max(shape)


def rank(M: ComplexMatrix, pol: TolerancePolicy = DEFAULT_POLICY) -> int:
    M = np.asarray(M, dtype=complex)
    if M.size == 0:
        return 0
    s = linalg.svdvals(M)
    if s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > _rcond(M.shape, pol) * s[0]))


def _fix_phases(basis: ComplexMatrix) -> ComplexMatrix:
    # largest-modulus entry of every column made real positive
    if basis.shape[1] == 0:
        return basis
    pivots = np.argmax(np.abs(basis), axis=0)
    entries = basis[pivots, np.arange(basis.shape[1])]
    phases = entries / np.abs(entries)
    return basis * phases.conj()[None, :]


def orthonormal_basis(columns: ComplexMatrix, pol: TolerancePolicy = DEFAULT_POLICY) -> Subspace:
    columns = np.asarray(columns, dtype=complex)
    n = columns.shape[0]
    if columns.shape[1] == 0 or n == 0:
        return Subspace.zero(n)
    U, s, _ = linalg.svd(columns, full_matrices=False)
    if s[0] == 0.0:
        return Subspace.zero(n)
    r = int(np.count_nonzero(s > _rcond(columns.shape, pol) * s[0]))
    return Subspace(_fix_phases(U[:, :r]))


def _null_space(M: ComplexMatrix, pol: TolerancePolicy) -> ComplexMatrix:
    if M.shape[0] == 0 or not np.any(M):
        return np.eye(M.shape[1], dtype=complex)
    return linalg.null_space(M, rcond=_rcond(M.shape, pol))


def subspace_sum(U: Subspace, V: Subspace, pol: TolerancePolicy = DEFAULT_POLICY) -> Subspace:
    if U.ambient_dim != V.ambient_dim:
        raise ShapeError(f"ambient dimensions differ: {U.ambient_dim} vs {V.ambient_dim}")
    return orthonormal_basis(np.hstack([U.basis, V.basis]), pol)


def orthogonal_complement(U: Subspace, pol: TolerancePolicy = DEFAULT_POLICY) -> Subspace:
    n = U.ambient_dim
    if U.dim == 0:
        return Subspace.full(n)
    if U.dim == n:
        return Subspace.zero(n)
    return orthonormal_basis(_null_space(U.basis.conj().T, pol), pol)


def subspace_intersection(U: Subspace, V: Subspace, pol: TolerancePolicy = DEFAULT_POLICY) -> Subspace:
    if U.ambient_dim != V.ambient_dim:
        raise ShapeError(f"ambient dimensions differ: {U.ambient_dim} vs {V.ambient_dim}")
    if U.dim == 0 or V.dim == 0:
        return Subspace.zero(U.ambient_dim)
    # (x, y) with B_U x = B_V y
    Z = _null_space(np.hstack([U.basis, -V.basis]), pol)
    if Z.shape[1] == 0:
        return Subspace.zero(U.ambient_dim)
    return orthonormal_basis(U.basis @ Z[:U.dim], pol)


def projector(U: Subspace) -> ComplexMatrix:
    return U.projector()


def containment_residual(U: Subspace, V: Subspace) -> float:
    """Frobenius norm of the part of U's basis lying outside V."""
    if U.dim == 0:
        return 0.0
    outside = U.basis - V.basis @ (V.basis.conj().T @ U.basis)
    return float(np.linalg.norm(outside))


def invariant_closure(
    start: Union[ComplexMatrix, Subspace],
    generators: Sequence[ComplexMatrix],
    pol: TolerancePolicy = DEFAULT_POLICY,
) -> Subspace:
    space = start if isinstance(start, Subspace) else orthonormal_basis(start, pol)
    n = space.ambient_dim
    for _ in range(n + 1):
        if space.dim in (0, n):
            break
        grown = orthonormal_basis(np.hstack([space.basis] + [g @ space.basis for g in generators]), pol)
        if grown.dim == space.dim:
            break
        space = grown
    return space


def psd_sqrt(P: ComplexMatrix) -> ComplexMatrix:
    w, V = linalg.eigh((P + P.conj().T) / 2)
    w = np.clip(w, 0.0, None)
    return (V * np.sqrt(w)) @ V.conj().T


def polar_decompose(T: ComplexMatrix, pol: TolerancePolicy = DEFAULT_POLICY) -> Tuple[ComplexMatrix, ComplexMatrix]:
    T = np.asarray(T, dtype=complex)
    if T.ndim != 2 or T.shape[0] != T.shape[1]:
        raise ShapeError(f"polar decomposition needs a square matrix, got {T.shape}")
    n = T.shape[0]
    if n == 0:
        return np.zeros((0, 0), dtype=complex), np.zeros((0, 0), dtype=complex)
    s = linalg.svdvals(T)
    if s[0] == 0.0 or s[-1] <= _rcond(T.shape, pol) * s[0]:
        raise NotInvertible(f"smallest singular value {s[-1]:.3e} is below the rank cutoff")
    absT = psd_sqrt(T.conj().T @ T)
    # W absT = T  <=>  absT W* = T*
    W = linalg.solve(absT, T.conj().T, assume_a="her").conj().T
    return W, absT


def frobenius(M: ComplexMatrix) -> float:
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M))
