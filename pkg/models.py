from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from errors import ShapeError

# Dense complex matrix; every operator in the toolkit is one of these.
ComplexMatrix = np.ndarray

Word = Tuple[int, ...]


@dataclass(frozen=True, eq=False)
class Subspace:
    # columns of basis are orthonormal
    basis: ComplexMatrix

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @classmethod
    def zero(cls, ambient_dim: int) -> "Subspace":
        return cls(np.zeros((ambient_dim, 0), dtype=complex))

    @classmethod
    def full(cls, ambient_dim: int) -> "Subspace":
        return cls(np.eye(ambient_dim, dtype=complex))

    def projector(self) -> ComplexMatrix:
        return self.basis @ self.basis.conj().T


@dataclass(frozen=True, eq=False)
class AlgebraPresentation:
    label: str
    gen_matrices: Tuple[ComplexMatrix, ...]
    adjoint_map: Tuple[int, ...]

    def __post_init__(self):
        if len(self.gen_matrices) == 0:
            raise ShapeError(f"algebra '{self.label}' needs at least one generator")
        if len(self.adjoint_map) != len(self.gen_matrices):
            raise ShapeError(f"algebra '{self.label}': adjoint_map length differs from generator count")
        n = self.gen_matrices[0].shape[0]
        for g in self.gen_matrices:
            if g.shape != (n, n):
                raise ShapeError(f"algebra '{self.label}': generators must all be {n}x{n}")
        for g, h in enumerate(self.adjoint_map):
            if not 0 <= h < len(self.gen_matrices) or self.adjoint_map[h] != g:
                raise ShapeError(f"algebra '{self.label}': adjoint_map is not an involution")

    @property
    def gen_count(self) -> int:
        return len(self.gen_matrices)

    @property
    def ambient_dim(self) -> int:
        return self.gen_matrices[0].shape[0]


@dataclass(frozen=True)
class AlgebraElement:
    # the empty word is the unit
    terms: Tuple[Tuple[complex, Word], ...] = ()

    @classmethod
    def unit(cls) -> "AlgebraElement":
        return cls(((1.0 + 0j, ()),))

    @classmethod
    def zero(cls) -> "AlgebraElement":
        return cls(())

    @classmethod
    def word(cls, word: Sequence[int], coeff: complex = 1.0) -> "AlgebraElement":
        return cls(((complex(coeff), tuple(word)),))

    @classmethod
    def generator(cls, g: int, coeff: complex = 1.0) -> "AlgebraElement":
        return cls.word((g,), coeff)

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        return AlgebraElement(self.terms + other.terms)

    def __mul__(self, other: "AlgebraElement") -> "AlgebraElement":
        return AlgebraElement(tuple(
            (c1 * c2, w1 + w2) for c1, w1 in self.terms for c2, w2 in other.terms
        ))

    def adjoint(self, adjoint_map: Sequence[int]) -> "AlgebraElement":
        return AlgebraElement(tuple(
            (complex(np.conj(c)), tuple(adjoint_map[g] for g in reversed(w))) for c, w in self.terms
        ))

    def max_index(self) -> int:
        return max((g for _, w in self.terms for g in w), default=-1)


@dataclass(frozen=True, eq=False)
class Representation:
    algebra: AlgebraPresentation
    images: Tuple[ComplexMatrix, ...]

    def __post_init__(self):
        if len(self.images) != self.algebra.gen_count:
            raise ShapeError(
                f"representation of '{self.algebra.label}' needs {self.algebra.gen_count} images, got {len(self.images)}"
            )
        d = self.images[0].shape[0]
        for image in self.images:
            if image.shape != (d, d):
                raise ShapeError("representation images must be square and of equal size")

    @property
    def dim(self) -> int:
        return self.images[0].shape[0]


@dataclass(frozen=True, eq=False)
class StinespringData:
    """X_0 pi_1(a_1) X_1 ... pi_k(a_k) X_k with X_0: K_1 -> H and X_k: G -> K_k."""
    reps: Tuple[Representation, ...]
    X: Tuple[ComplexMatrix, ...]

    def __post_init__(self):
        if len(self.reps) == 0:
            raise ShapeError("Stinespring data needs at least one slot")
        if len(self.X) != len(self.reps) + 1:
            raise ShapeError(f"expected {len(self.reps) + 1} connecting operators, got {len(self.X)}")
        for i, rep in enumerate(self.reps):
            left, right = self.X[i], self.X[i + 1]
            if left.shape[1] != rep.dim or right.shape[0] != rep.dim:
                raise ShapeError(
                    f"slot {i + 1}: X_{i} is {left.shape}, X_{i + 1} is {right.shape}, representation dim {rep.dim}"
                )

    @property
    def k(self) -> int:
        return len(self.reps)

    @property
    def dims(self) -> List[int]:
        return [rep.dim for rep in self.reps]

    @property
    def dim_h(self) -> int:
        return self.X[0].shape[0]

    @property
    def dim_g(self) -> int:
        return self.X[-1].shape[1]

    @property
    def algebras(self) -> List[AlgebraPresentation]:
        return [rep.algebra for rep in self.reps]


@dataclass(frozen=True, eq=False)
class MapInstance:
    algebras: Tuple[AlgebraPresentation, ...]
    representation_a: StinespringData
    representation_b: Optional[StinespringData] = None

    def __post_init__(self):
        for data in (self.representation_a, self.representation_b):
            if data is None:
                continue
            if data.k != len(self.algebras):
                raise ShapeError(f"representation has {data.k} slots, instance declares {len(self.algebras)} algebras")
            for i, (rep, alg) in enumerate(zip(data.reps, self.algebras)):
                if rep.algebra is not alg and rep.algebra.label != alg.label:
                    raise ShapeError(f"slot {i + 1} uses algebra '{rep.algebra.label}', expected '{alg.label}'")
        if self.representation_b is not None:
            a, b = self.representation_a, self.representation_b
            if (a.dim_g, a.dim_h) != (b.dim_g, b.dim_h):
                raise ShapeError("both representations must act between the same spaces G and H")

    @property
    def is_pair(self) -> bool:
        return self.representation_b is not None


@dataclass(frozen=True, eq=False)
class SpanChain:
    right: List[Subspace]
    left: List[Subspace]


@dataclass(frozen=True)
class MinimalityReport:
    slot_dims: List[int]
    right_dims: List[int]
    left_dims: List[int]

    @property
    def minimal_right(self) -> List[bool]:
        return [r == d for r, d in zip(self.right_dims, self.slot_dims)]

    @property
    def minimal_left(self) -> List[bool]:
        return [l == d for l, d in zip(self.left_dims, self.slot_dims)]

    @property
    def minimal(self) -> bool:
        return all(self.minimal_right) and all(self.minimal_left)


@dataclass(frozen=True, eq=False)
class PairedSubspaces:
    R: List[Subspace]
    N: List[Subspace]
    containment_res: List[float]


@dataclass(frozen=True)
class GenericPositionReport:
    # dims of N^K, N^K_perp, N_perp^K, N_perp^K_perp
    meet_dims: Tuple[int, int, int, int]
    dim_n: int
    split: Tuple[int, int]

    @property
    def passed(self) -> bool:
        dk, dl = self.split
        return all(d == 0 for d in self.meet_dims) and self.dim_n == dk == dl


@dataclass(frozen=True, eq=False)
class IntertwinerResult:
    T: List[ComplexMatrix]
    W: List[ComplexMatrix]
    absT: List[ComplexMatrix]
    generic_position: List[GenericPositionReport]
    intertwine_res: List[float]
    unitary_equiv_res: List[float]
    abs_commutation_res: List[float]
    unitarity_res: List[float]
    halmos_res: List[float]
    boundary_res_iii: float
    chain_res_iv: List[float]
    boundary_res_v_first: float
    boundary_res_v_second: float
    diagnostics: Dict[str, List[float]] = field(default_factory=dict)

    @property
    def k(self) -> int:
        return len(self.T)

    def residual_families(self) -> Dict[str, List[float]]:
        return {
            "intertwine_i": list(self.intertwine_res),
            "unitary_equiv_ii": list(self.unitary_equiv_res),
            "abs_commutation_ii": list(self.abs_commutation_res),
            "unitarity_ii": list(self.unitarity_res),
            "boundary_iii": [self.boundary_res_iii],
            "chain_iv": list(self.chain_res_iv),
            "boundary_v_first": [self.boundary_res_v_first],
            "boundary_v_second": [self.boundary_res_v_second],
        }

    def max_residual(self) -> float:
        values = [v for family in self.residual_families().values() for v in family]
        return max(values, default=0.0)

    def passed(self, eq_atol: float) -> bool:
        return all(report.passed for report in self.generic_position) and self.max_residual() <= eq_atol


@dataclass(frozen=True, eq=False)
class SpectralTripleSpec:
    D: ComplexMatrix
    algebra: AlgebraPresentation
    xi: np.ndarray
    k: int

    @property
    def n(self) -> int:
        return self.D.shape[0]
