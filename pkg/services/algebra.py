import logging
from functools import lru_cache
from typing import List, NamedTuple, Sequence, Tuple

import numpy as np
from scipy import linalg

from config import DEFAULT_POLICY, TolerancePolicy
from errors import NotARepresentation, NotInAlgebra, NotUnital, ShapeError
from models import AlgebraElement, AlgebraPresentation, ComplexMatrix, Representation, Word

logger = logging.getLogger(__name__)

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


class RepresentationReport(NamedTuple):
    max_residual: float
    adjoint_residual: float
    relations_checked: int


def from_matrices(label: str, matrices: Sequence[ComplexMatrix], pol: TolerancePolicy = DEFAULT_POLICY) -> AlgebraPresentation:
    """Presentation generated by the given matrices; adjoints are appended when missing."""
    gens = [np.array(m, dtype=complex) for m in matrices]
    adjoint_map: List[int] = []
    g = 0
    while g < len(gens):
        star = gens[g].conj().T
        match = next((h for h, other in enumerate(gens) if np.linalg.norm(other - star) <= pol.eq_atol), None)
        if match is None:
            gens.append(star)
            match = len(gens) - 1
        adjoint_map.append(match)
        g += 1
    return AlgebraPresentation(label, tuple(gens), tuple(adjoint_map))


def scalar_algebra() -> AlgebraPresentation:
    return AlgebraPresentation("C", (np.eye(1, dtype=complex),), (0,))


def matrix_algebra(n: int) -> AlgebraPresentation:
    if n == 1:
        return AlgebraPresentation("M1", (np.eye(1, dtype=complex),), (0,))
    gens, adjoint_map = [], []
    for j in range(n - 1):
        up = np.zeros((n, n), dtype=complex)
        up[j, j + 1] = 1.0
        gens.extend([up, up.T.copy()])
        adjoint_map.extend([2 * j + 1, 2 * j])
    return AlgebraPresentation(f"M{n}", tuple(gens), tuple(adjoint_map))


def diagonal_algebra(n: int) -> AlgebraPresentation:
    gens = []
    for j in range(n):
        e = np.zeros((n, n), dtype=complex)
        e[j, j] = 1.0
        gens.append(e)
    return AlgebraPresentation(f"D{n}", tuple(gens), tuple(range(n)))


def pauli_algebra() -> AlgebraPresentation:
    return AlgebraPresentation("M2-pauli", (SIGMA_X, SIGMA_Z), (0, 1))


def _check_adjoints(alg: AlgebraPresentation, images: Sequence[ComplexMatrix]) -> float:
    return max(
        (float(np.linalg.norm(images[alg.adjoint_map[g]] - images[g].conj().T)) for g in range(alg.gen_count)),
        default=0.0,
    )


def word_image(images: Sequence[ComplexMatrix], word: Word, dim: int) -> ComplexMatrix:
    product = np.eye(dim, dtype=complex)
    for g in word:
        product = product @ images[g]
    return product


class _SpanTracker:
    # incremental orthonormal basis of vectorized matrices
    def __init__(self, length: int, pol: TolerancePolicy):
        self.Q = np.zeros((length, 0), dtype=complex)
        self.cutoff = pol.rank_rtol * length

    def residual(self, v: np.ndarray) -> np.ndarray:
        for _ in range(2):
            v = v - self.Q @ (self.Q.conj().T @ v)
        return v

    def grows(self, v: np.ndarray) -> bool:
        norm = np.linalg.norm(v)
        return norm > 0 and np.linalg.norm(self.residual(v)) > self.cutoff * norm

    def add(self, v: np.ndarray) -> None:
        r = self.residual(v)
        self.Q = np.hstack([self.Q, (r / np.linalg.norm(r))[:, None]])


@lru_cache(maxsize=256)
def word_basis(alg: AlgebraPresentation, pol: TolerancePolicy = DEFAULT_POLICY) -> Tuple[Tuple[Word, ...], ComplexMatrix]:
    n = alg.ambient_dim
    gens = alg.gen_matrices
    adjoint_res = _check_adjoints(alg, gens)
    if adjoint_res > pol.eq_atol:
        raise NotARepresentation(f"defining matrices of '{alg.label}' are not closed under adjoints", adjoint_res)

    # closure over non-empty words first, to decide whether the identity is reached
    tracker = _SpanTracker(n * n, pol)
    kept: List[Word] = []
    frontier: List[Word] = [(g,) for g in range(alg.gen_count)]
    for _ in range(n * n):
        added = []
        for w in frontier:
            v = word_image(gens, w, n).ravel()
            if tracker.grows(v):
                tracker.add(v)
                added.append(w)
        kept.extend(added)
        if not added:
            break
        frontier = [w + (g,) for w in added for g in range(alg.gen_count)]
    if tracker.grows(np.eye(n, dtype=complex).ravel()):
        raise NotUnital(f"identity is not in the span of the words of '{alg.label}'")

    basis_tracker = _SpanTracker(n * n, pol)
    words: List[Word] = []
    for w in [()] + kept:
        v = word_image(gens, w, n).ravel()
        if basis_tracker.grows(v):
            basis_tracker.add(v)
            words.append(w)
    coeff_matrix = np.column_stack([word_image(gens, w, n).ravel() for w in words])
    coeff_matrix.setflags(write=False)
    logger.debug("word basis of %s: %d words, max length %d", alg.label, len(words), max(len(w) for w in words))
    return tuple(words), coeff_matrix


def basis_elements(alg: AlgebraPresentation, pol: TolerancePolicy = DEFAULT_POLICY) -> List[AlgebraElement]:
    words, _ = word_basis(alg, pol)
    return [AlgebraElement.word(w) for w in words]


def evaluate_element(rep: Representation, x: AlgebraElement) -> ComplexMatrix:
    if x.max_index() >= rep.algebra.gen_count:
        raise ShapeError(f"element references generator {x.max_index()} of '{rep.algebra.label}'")
    result = np.zeros((rep.dim, rep.dim), dtype=complex)
    for coeff, w in x.terms:
        result += coeff * word_image(rep.images, w, rep.dim)
    return result


def verify_representation(rep: Representation, pol: TolerancePolicy = DEFAULT_POLICY) -> RepresentationReport:
    alg = rep.algebra
    words, C = word_basis(alg, pol)
    adjoint_res = _check_adjoints(alg, rep.images)
    if adjoint_res > pol.eq_atol:
        raise NotARepresentation(f"images of '{alg.label}' do not respect the adjoint map", adjoint_res)

    C_pinv = np.linalg.pinv(C)
    rep_basis = [word_image(rep.images, w, rep.dim) for w in words]
    worst = 0.0
    checked = 0
    for b in words:
        for g in range(alg.gen_count):
            w = b + (g,)
            coeffs = C_pinv @ word_image(alg.gen_matrices, w, alg.ambient_dim).ravel()
            predicted = sum((c * M for c, M in zip(coeffs, rep_basis)), np.zeros((rep.dim, rep.dim), dtype=complex))
            worst = max(worst, float(np.linalg.norm(word_image(rep.images, w, rep.dim) - predicted)))
            checked += 1
    if worst > pol.eq_atol:
        raise NotARepresentation(f"images of '{alg.label}' violate a relation (residual {worst:.3e})", worst)
    return RepresentationReport(worst, adjoint_res, checked)


def element_from_matrix(alg: AlgebraPresentation, a: ComplexMatrix, pol: TolerancePolicy = DEFAULT_POLICY) -> AlgebraElement:
    a = np.asarray(a, dtype=complex)
    if a.shape != (alg.ambient_dim, alg.ambient_dim):
        raise ShapeError(f"matrix of shape {a.shape} cannot lie in '{alg.label}' ({alg.ambient_dim}x{alg.ambient_dim})")
    words, C = word_basis(alg, pol)
    coeffs, *_ = linalg.lstsq(C, a.ravel())
    residual = float(np.linalg.norm(C @ coeffs - a.ravel()))
    if residual > pol.eq_atol:
        raise NotInAlgebra(f"matrix is not in the algebra '{alg.label}' (residual {residual:.3e})")
    return AlgebraElement(tuple((complex(c), w) for c, w in zip(coeffs, words)))


def amplify(alg: AlgebraPresentation, m: int) -> Representation:
    """a -> a (x) I_m."""
    identity = np.eye(m, dtype=complex)
    return Representation(alg, tuple(np.kron(g, identity) for g in alg.gen_matrices))


def identity_representation(alg: AlgebraPresentation) -> Representation:
    return amplify(alg, 1)


def direct_sum(first: Representation, second: Representation) -> Representation:
    if first.algebra is not second.algebra and first.algebra.label != second.algebra.label:
        raise ShapeError("direct sum needs representations of the same algebra")
    return Representation(first.algebra, tuple(linalg.block_diag(p, q) for p, q in zip(first.images, second.images)))


def compress(rep: Representation, basis: ComplexMatrix) -> Representation:
    """Restriction of rep to the (invariant) range of the orthonormal columns of basis."""
    return Representation(rep.algebra, tuple(basis.conj().T @ g @ basis for g in rep.images))


def commutant_basis(rep: Representation, pol: TolerancePolicy = DEFAULT_POLICY) -> List[ComplexMatrix]:
    d = rep.dim
    if d == 0:
        return []
    identity = np.eye(d, dtype=complex)
    # row-major vec: vec(gS - Sg) = (g (x) I - I (x) g^T) vec(S)
    M = np.vstack([np.kron(g, identity) - np.kron(identity, g.T) for g in rep.images])
    if not np.any(M):
        null = np.eye(d * d, dtype=complex)
    else:
        null = linalg.null_space(M, rcond=pol.rank_rtol * max(M.shape))
    return [null[:, j].reshape(d, d) for j in range(null.shape[1])]


def commutation_residual(S: ComplexMatrix, rep: Representation) -> float:
    return max((float(np.linalg.norm(S @ g - g @ S)) for g in rep.images), default=0.0)
