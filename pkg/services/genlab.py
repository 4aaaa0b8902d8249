import logging
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from config import DEFAULT_POLICY, MAX_SLOT_DIM, MAX_SLOTS, TolerancePolicy
from errors import NotHermitian, NotInCommutant, NotInvertible, PreconditionError, ShapeError
from models import (
    AlgebraElement,
    AlgebraPresentation,
    ComplexMatrix,
    MapInstance,
    Representation,
    SpectralTripleSpec,
    StinespringData,
)
from schemas import GeneratorSpec
from services.algebra import (
    amplify,
    commutant_basis,
    commutation_residual,
    diagonal_algebra,
    direct_sum,
    evaluate_element,
    identity_representation,
    matrix_algebra,
    word_basis,
    word_image,
)
from services.minimality import MinimalityAnalyzer
from services.numerics import frobenius

logger = logging.getLogger(__name__)

DirectEvaluator = Callable[[Sequence[AlgebraElement]], ComplexMatrix]


def random_matrix(rng: np.random.Generator, rows: int, cols: int) -> ComplexMatrix:
    """Entries with real and imaginary parts uniform on [-1, 1]."""
    return rng.uniform(-1.0, 1.0, (rows, cols)) + 1j * rng.uniform(-1.0, 1.0, (rows, cols))


def random_hermitian(rng: np.random.Generator, n: int) -> ComplexMatrix:
    M = random_matrix(rng, n, n)
    return (M + M.conj().T) / 2


def _check_invertible(M: ComplexMatrix, pol: TolerancePolicy, name: str) -> None:
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ShapeError(f"{name} must be square, got {M.shape}")
    if M.shape[0] == 0:
        return
    s = linalg.svdvals(M)
    if s[0] == 0.0 or s[-1] <= pol.rank_rtol * M.shape[0] * s[0]:
        raise NotInvertible(f"{name} is not invertible (smallest singular value {s[-1]:.3e})")


def _algebra(kind: str, n: int) -> AlgebraPresentation:
    if kind == "diagonal":
        return diagonal_algebra(n)
    return matrix_algebra(n)


def _multiplicity(rep: Representation, pol: TolerancePolicy) -> int:
    n = rep.algebra.ambient_dim
    if rep.dim % n:
        raise ShapeError(f"representation of dimension {rep.dim} is not an amplification of '{rep.algebra.label}'")
    m = rep.dim // n
    expected = amplify(rep.algebra, m)
    if max(frobenius(a - b) for a, b in zip(rep.images, expected.images)) > pol.eq_atol:
        raise ShapeError(f"representation of '{rep.algebra.label}' is not of the form a (x) I_{m}")
    return m


class InstanceGenerator:
    def __init__(self, policy: TolerancePolicy = DEFAULT_POLICY):
        self.policy = policy
        self.analyzer = MinimalityAnalyzer(policy)

    def gen_cp_dilation(
        self, kraus: Sequence[ComplexMatrix], algebra: Optional[AlgebraPresentation] = None
    ) -> StinespringData:
        kraus = [np.asarray(V, dtype=complex) for V in kraus]
        if not kraus:
            raise ShapeError("at least one Kraus operator is required")
        n = kraus[0].shape[0]
        for V in kraus:
            if V.shape != (n, n):
                raise ShapeError(f"Kraus operators must all be {n}x{n}, got {V.shape}")
        if not any(np.any(V) for V in kraus):
            raise PreconditionError("at least one Kraus operator must be nonzero")
        algebra = algebra or matrix_algebra(n)
        if algebra.ambient_dim != n:
            raise ShapeError(f"algebra '{algebra.label}' acts on dimension {algebra.ambient_dim}, Kraus operators on {n}")
        m = len(kraus)
        basis = np.eye(m, dtype=complex)
        X1 = sum(np.kron(V, basis[:, [j]]) for j, V in enumerate(kraus))
        return StinespringData((amplify(algebra, m),), (X1.conj().T, X1))

    def gen_commutant_perturbation(
        self, base: StinespringData, slot: int, S: ComplexMatrix
    ) -> Tuple[StinespringData, List[ComplexMatrix]]:
        if not 1 <= slot <= base.k:
            raise ShapeError(f"slot {slot} outside 1..{base.k}")
        rep = base.reps[slot - 1]
        S = np.asarray(S, dtype=complex)
        if S.shape != (rep.dim, rep.dim):
            raise ShapeError(f"S must be {rep.dim}x{rep.dim}, got {S.shape}")
        residual = commutation_residual(S, rep)
        if residual > self.policy.eq_atol:
            raise NotInCommutant(f"S does not commute with slot {slot} (residual {residual:.3e})")
        _check_invertible(S, self.policy, "S")

        X = list(base.X)
        X[slot - 1] = linalg.solve(S.T, X[slot - 1].T).T
        X[slot] = S @ X[slot]
        expected_T = [np.eye(r.dim, dtype=complex) for r in base.reps]
        expected_T[slot - 1] = S
        return StinespringData(base.reps, tuple(X)), expected_T

    def gen_spectral_triple(self, spec: SpectralTripleSpec) -> Tuple[DirectEvaluator, StinespringData]:
        D = np.asarray(spec.D, dtype=complex)
        n = spec.n
        if D.shape != (n, n) or spec.algebra.ambient_dim != n:
            raise ShapeError(f"D is {D.shape}, algebra '{spec.algebra.label}' acts on dimension {spec.algebra.ambient_dim}")
        hermitian_res = frobenius(D - D.conj().T)
        if hermitian_res > self.policy.eq_atol:
            raise NotHermitian(f"D is not self-adjoint (residual {hermitian_res:.3e})")
        xi = np.asarray(spec.xi, dtype=complex).reshape(-1, 1)
        if xi.shape[0] != n:
            raise ShapeError(f"xi has length {xi.shape[0]}, expected {n}")
        if abs(np.linalg.norm(xi) - 1.0) > self.policy.eq_atol:
            raise PreconditionError("xi must be a unit vector")
        if spec.k < 0:
            raise ShapeError("k must be non-negative")

        identity = np.eye(n, dtype=complex)
        outer = identity_representation(spec.algebra)
        doubled = direct_sum(outer, outer)
        reps = (outer,) + (doubled,) * spec.k

        if spec.k == 0:
            X = (xi.conj().T, xi)
        else:
            row = np.hstack([D, -identity])
            middle = np.vstack([row, D @ row])
            column = np.vstack([xi, D @ xi])
            X = (xi.conj().T, row) + (middle,) * (spec.k - 1) + (column,)

        def direct_evaluator(args: Sequence[AlgebraElement]) -> ComplexMatrix:
            if len(args) != spec.k + 1:
                raise ShapeError(f"form takes {spec.k + 1} arguments, got {len(args)}")
            product = evaluate_element(outer, args[0])
            for x in args[1:]:
                a = evaluate_element(outer, x)
                product = product @ (D @ a - a @ D)
            return xi.conj().T @ product @ xi

        return direct_evaluator, StinespringData(reps, X)

    def gen_similarity_homomorphism(self, rep: Representation, X: ComplexMatrix) -> StinespringData:
        X = np.asarray(X, dtype=complex)
        if X.shape != (rep.dim, rep.dim):
            raise ShapeError(f"X must be {rep.dim}x{rep.dim}, got {X.shape}")
        _check_invertible(X, self.policy, "X")
        return StinespringData((rep,), (np.linalg.inv(X), X))

    def multiplicativity_residual(self, S: StinespringData) -> float:
        """max over word pairs of ||phi(ab) - phi(a)phi(b)||."""
        if S.k != 1 or S.dim_g != S.dim_h:
            raise ShapeError("multiplicativity is defined for one-slot maps with G = H")
        rep = S.reps[0]
        words, _ = word_basis(rep.algebra, self.policy)
        values = {w: S.X[0] @ word_image(rep.images, w, rep.dim) @ S.X[1] for w in words}
        worst = 0.0
        for u in words:
            for v in words:
                joint = S.X[0] @ word_image(rep.images, u + v, rep.dim) @ S.X[1]
                worst = max(worst, frobenius(joint - values[u] @ values[v]))
        return worst

    def random_commutant_element(self, rep: Representation, rng: np.random.Generator) -> ComplexMatrix:
        basis = commutant_basis(rep, self.policy)
        coeffs = random_matrix(rng, len(basis), 1)[:, 0]
        E = sum((c * B for c, B in zip(coeffs, basis)), np.zeros((rep.dim, rep.dim), dtype=complex))
        norm = np.linalg.norm(E, 2)
        if norm > 0:
            E = E / norm
        return 2.0 * np.eye(rep.dim, dtype=complex) + E

    def dilate(
        self, base: StinespringData, multiplicities: Sequence[int], rng: np.random.Generator
    ) -> StinespringData:
        """Same map through a + (x) I_m' slots, using left-inverse pairs L_i R_i = I."""
        if len(multiplicities) != base.k:
            raise ShapeError(f"need {base.k} multiplicities, got {len(multiplicities)}")
        reps, E, F = [], [], []
        for rep, new_m in zip(base.reps, multiplicities):
            m = _multiplicity(rep, self.policy)
            if new_m < m:
                raise ShapeError(f"cannot dilate multiplicity {m} down to {new_m}")
            n = rep.algebra.ambient_dim
            R = random_matrix(rng, new_m, m)
            R_pinv = np.linalg.pinv(R)
            L = R_pinv + random_matrix(rng, m, new_m) @ (np.eye(new_m) - R @ R_pinv)
            reps.append(amplify(rep.algebra, new_m))
            E.append(np.kron(np.eye(n), R))
            F.append(np.kron(np.eye(n), L))

        X = [base.X[0] @ F[0]]
        for i in range(1, base.k):
            X.append(E[i - 1] @ base.X[i] @ F[i])
        X.append(E[-1] @ base.X[-1])
        return StinespringData(tuple(reps), tuple(X))

    def _check_caps(self, spec: GeneratorSpec) -> None:
        if not 1 <= spec.k <= MAX_SLOTS:
            raise ShapeError(f"k = {spec.k} outside 1..{MAX_SLOTS}")
        if len(spec.slot_algebra_dims) != spec.k or len(spec.multiplicities) != spec.k:
            raise ShapeError("slot_algebra_dims and multiplicities need one entry per slot")
        dims = [n * m for n, m in zip(spec.slot_algebra_dims, spec.multiplicities)]
        if spec.pair:
            dims += [n * m for n, m in zip(spec.slot_algebra_dims, self._pair_multiplicities(spec))]
        if max(dims) > MAX_SLOT_DIM:
            raise ShapeError(f"slot dimension {max(dims)} exceeds the cap {MAX_SLOT_DIM}")

    @staticmethod
    def _pair_multiplicities(spec: GeneratorSpec) -> List[int]:
        if spec.pair_multiplicities is not None:
            return list(spec.pair_multiplicities)
        return [m + 1 for m in spec.multiplicities]

    def _random_base(self, spec: GeneratorSpec, rng: np.random.Generator) -> StinespringData:
        reps = tuple(
            amplify(_algebra(spec.algebra_kind, n), m) for n, m in zip(spec.slot_algebra_dims, spec.multiplicities)
        )
        sizes = [spec.dim_h] + [rep.dim for rep in reps] + [spec.dim_g]
        X = tuple(random_matrix(rng, rows, cols) for rows, cols in zip(sizes[:-1], sizes[1:]))
        return StinespringData(reps, X)

    def random_instance(self, spec: GeneratorSpec) -> MapInstance:
        self._check_caps(spec)
        rng = np.random.default_rng(spec.seed)
        base = self._random_base(spec, rng)
        algebras = tuple(base.algebras)
        if not spec.pair:
            if spec.reduce:
                base, _ = self.analyzer.reduce_to_minimal(base)
            return MapInstance(algebras, base)

        other = self.dilate(base, self._pair_multiplicities(spec), rng)
        A, _ = self.analyzer.reduce_to_minimal(base)
        B, _ = self.analyzer.reduce_to_minimal(other)
        logger.debug("pair generated: slot dims %s and %s", A.dims, B.dims)
        return MapInstance(algebras, A, B)

    def commutant_perturbation_instance(self, spec: GeneratorSpec) -> Tuple[MapInstance, List[ComplexMatrix]]:
        self._check_caps(spec)
        rng = np.random.default_rng(spec.seed)
        base, _ = self.analyzer.reduce_to_minimal(self._random_base(spec, rng))
        slot = spec.payload.slot if spec.payload else 1
        S = self.random_commutant_element(base.reps[slot - 1], rng)
        perturbed, expected_T = self.gen_commutant_perturbation(base, slot, S)
        return MapInstance(tuple(base.algebras), base, perturbed), expected_T

    def generate(self, spec: GeneratorSpec) -> MapInstance:
        logger.debug("generating %s with seed %d", spec.kind, spec.seed)
        if spec.kind == "random_instance":
            return self.random_instance(spec)
        if spec.kind == "commutant_perturbation":
            return self.commutant_perturbation_instance(spec)[0]

        rng = np.random.default_rng(spec.seed)
        payload = spec.payload
        n = spec.slot_algebra_dims[0] if spec.slot_algebra_dims else 2
        algebra = _algebra(spec.algebra_kind, n)

        if spec.kind == "cp_dilation":
            if payload and payload.kraus:
                kraus = [matrix.to_array() for matrix in payload.kraus]
                algebra = _algebra(spec.algebra_kind, kraus[0].shape[0])
            else:
                m = spec.multiplicities[0] if spec.multiplicities else 2
                kraus = [random_matrix(rng, n, n) for _ in range(m)]
            S = self.gen_cp_dilation(kraus, algebra)
        elif spec.kind == "spectral_triple":
            if payload and payload.D is not None:
                D = payload.D.to_array()
                algebra = _algebra(spec.algebra_kind, D.shape[0])
            else:
                D = random_hermitian(rng, n)
            if payload and payload.xi is not None:
                xi = payload.xi.to_array()[:, 0]
            else:
                xi = random_matrix(rng, D.shape[0], 1)[:, 0]
                xi = xi / np.linalg.norm(xi)
            _, S = self.gen_spectral_triple(SpectralTripleSpec(D, algebra, xi, spec.k))
        elif spec.kind == "similarity_homomorphism":
            if payload and payload.X is not None:
                X = payload.X.to_array()
                algebra = _algebra(spec.algebra_kind, X.shape[0])
            else:
                X = random_matrix(rng, n, n)
            S = self.gen_similarity_homomorphism(identity_representation(algebra), X)
        else:
            raise ShapeError(f"unknown generator kind '{spec.kind}'")
        return MapInstance(tuple(S.algebras), S)
