import itertools
import logging
from typing import Callable, List, Sequence, Tuple

import numpy as np

from config import DEFAULT_POLICY, TolerancePolicy
from errors import ShapeError
from models import AlgebraElement, ComplexMatrix, StinespringData, Word
from services.algebra import evaluate_element, verify_representation, word_basis, word_image

logger = logging.getLogger(__name__)

Evaluator = Callable[[Sequence[AlgebraElement]], ComplexMatrix]


def validate_data(S: StinespringData, pol: TolerancePolicy = DEFAULT_POLICY) -> float:
    """Runs verify_representation on every slot and returns the worst residual."""
    return max(verify_representation(rep, pol).max_residual for rep in S.reps)


def evaluate_phi(S: StinespringData, args: Sequence[AlgebraElement]) -> ComplexMatrix:
    if len(args) != S.k:
        raise ShapeError(f"map has {S.k} slots, got {len(args)} arguments")
    result = S.X[0]
    for rep, x, X in zip(S.reps, args, S.X[1:]):
        result = result @ evaluate_element(rep, x) @ X
    return result


def evaluate_adjoint_chain(S: StinespringData, i: int, args: Sequence[AlgebraElement], eta: np.ndarray) -> np.ndarray:
    """pi_i(a_i) X_{i-1}^* ... pi_1(a_1) X_0^* eta for the 1-based slot i."""
    if not 1 <= i <= S.k:
        raise ShapeError(f"slot {i} outside 1..{S.k}")
    if len(args) != i:
        raise ShapeError(f"adjoint chain to slot {i} takes {i} arguments, got {len(args)}")
    eta = np.asarray(eta, dtype=complex)
    if eta.shape != (S.dim_h,):
        raise ShapeError(f"eta must have length {S.dim_h}")
    v = eta
    for j in range(i):
        v = evaluate_element(S.reps[j], args[j]) @ (S.X[j].conj().T @ v)
    return v


def slot_words(S: StinespringData, pol: TolerancePolicy = DEFAULT_POLICY) -> List[Tuple[Word, ...]]:
    return [word_basis(rep.algebra, pol)[0] for rep in S.reps]


def word_tuples(S: StinespringData, pol: TolerancePolicy = DEFAULT_POLICY) -> List[Tuple[Word, ...]]:
    # slot 1 outermost, same order as basis_evaluations
    return list(itertools.product(*slot_words(S, pol)))


def basis_evaluations(S: StinespringData, pol: TolerancePolicy = DEFAULT_POLICY) -> np.ndarray:
    """Phi on every word-basis tuple, stacked as (tuples, dim_h, dim_g)."""
    h = S.dim_h
    partial = S.X[0][None, :, :]
    for rep, words, X in zip(S.reps, slot_words(S, pol), S.X[1:]):
        images = np.stack([word_image(rep.images, w, rep.dim) for w in words])
        n, b, d = partial.shape[0], images.shape[0], rep.dim
        stacked = np.einsum("nhd,bde->nbhe", partial, images).reshape(n * b, h, d)
        partial = stacked @ X
    return partial


def _compare(first: np.ndarray, second: np.ndarray) -> float:
    if first.size == 0:
        return 0.0
    return float(np.max(np.abs(first - second)))


def phi_equal(A: StinespringData, B: StinespringData, pol: TolerancePolicy = DEFAULT_POLICY) -> Tuple[bool, float]:
    if A.k != B.k or (A.dim_g, A.dim_h) != (B.dim_g, B.dim_h):
        raise ShapeError("maps with different slot counts or spaces cannot be compared")
    for i, (ra, rb) in enumerate(zip(A.reps, B.reps)):
        if ra.algebra is not rb.algebra and ra.algebra.label != rb.algebra.label:
            raise ShapeError(f"slot {i + 1} uses different algebras")
    residual = _compare(basis_evaluations(A, pol), basis_evaluations(B, pol))
    logger.debug("phi_equal residual %.3e over %d slots", residual, A.k)
    return residual <= pol.eq_atol, residual


def phi_agrees(S: StinespringData, evaluator: Evaluator, pol: TolerancePolicy = DEFAULT_POLICY) -> Tuple[bool, float]:
    values = basis_evaluations(S, pol)
    expected = np.stack([
        evaluator([AlgebraElement.word(w) for w in words]) for words in word_tuples(S, pol)
    ])
    residual = _compare(values, expected)
    return residual <= pol.eq_atol, residual
