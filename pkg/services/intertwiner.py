import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import linalg

from config import DEFAULT_POLICY, TolerancePolicy
from errors import GenericPositionViolated, HalmosIdentityViolated, MapsDiffer, NotMinimal, ShapeError
from models import (
    ComplexMatrix,
    GenericPositionReport,
    IntertwinerResult,
    MapInstance,
    PairedSubspaces,
    Representation,
    StinespringData,
    Subspace,
)
from services.minimality import MinimalityAnalyzer
from services.numerics import (
    containment_residual,
    frobenius,
    invariant_closure,
    orthogonal_complement,
    orthonormal_basis,
    polar_decompose,
    subspace_intersection,
)
from services.stinespring import phi_equal

logger = logging.getLogger(__name__)


def _sigma_images(pi: Representation, rho: Representation) -> List[ComplexMatrix]:
    return [linalg.block_diag(p, q) for p, q in zip(pi.images, rho.images)]


def _pair_of(pair: MapInstance) -> Tuple[StinespringData, StinespringData]:
    if pair.representation_b is None:
        raise ShapeError("intertwiners need an instance with two representations")
    A, B = pair.representation_a, pair.representation_b
    if A.k != B.k or (A.dim_g, A.dim_h) != (B.dim_g, B.dim_h):
        raise ShapeError("the two representations must share k, G and H")
    return A, B


def graph_subspace(T: ComplexMatrix, pol: TolerancePolicy = DEFAULT_POLICY) -> Subspace:
    """Orthonormalized graph {(x, Tx)} of T."""
    return orthonormal_basis(np.vstack([np.eye(T.shape[1], dtype=complex), T]), pol)


class IntertwinerBuilder:
    def __init__(self, policy: TolerancePolicy = DEFAULT_POLICY, max_workers: Optional[int] = None):
        self.policy = policy
        self.max_workers = max_workers
        self.analyzer = MinimalityAnalyzer(policy)

    def build_R(self, pair: MapInstance) -> List[Subspace]:
        A, B = _pair_of(pair)
        spaces: List[Subspace] = [None] * A.k
        current = np.vstack([A.X[A.k], B.X[B.k]])
        for i in reversed(range(A.k)):
            sigma = _sigma_images(A.reps[i], B.reps[i])
            spaces[i] = invariant_closure(current, sigma, self.policy)
            current = linalg.block_diag(A.X[i], B.X[i]) @ spaces[i].basis
        return spaces

    def build_N(self, pair: MapInstance) -> List[Subspace]:
        A, B = _pair_of(pair)
        spaces: List[Subspace] = []
        # (-x, y) vectors of the paired adjoint chains
        current = np.vstack([-A.X[0].conj().T, B.X[0].conj().T])
        for i in range(A.k):
            sigma = _sigma_images(A.reps[i], B.reps[i])
            span = invariant_closure(current, sigma, self.policy)
            spaces.append(orthogonal_complement(span, self.policy))
            current = linalg.block_diag(A.X[i + 1].conj().T, B.X[i + 1].conj().T) @ span.basis
        return spaces

    def paired_subspaces(self, pair: MapInstance) -> PairedSubspaces:
        R = self.build_R(pair)
        N = self.build_N(pair)
        return PairedSubspaces(R=R, N=N, containment_res=[containment_residual(r, n) for r, n in zip(R, N)])

    def generic_position_check(self, N: Subspace, split: Tuple[int, int]) -> GenericPositionReport:
        dk, dl = split
        if N.ambient_dim != dk + dl:
            raise ShapeError(f"subspace lives in dimension {N.ambient_dim}, split is {dk}+{dl}")
        identity = np.eye(dk + dl, dtype=complex)
        K = Subspace(identity[:, :dk])
        K_perp = Subspace(identity[:, dk:])
        N_perp = orthogonal_complement(N, self.policy)
        meets = tuple(
            subspace_intersection(first, second, self.policy).dim
            for first, second in ((N, K), (N, K_perp), (N_perp, K), (N_perp, K_perp))
        )
        return GenericPositionReport(meet_dims=meets, dim_n=N.dim, split=(dk, dl))

    def graph_operator(
        self, N: Subspace, split: Tuple[int, int], report: Optional[GenericPositionReport] = None
    ) -> ComplexMatrix:
        report = report or self.generic_position_check(N, split)
        if not report.passed:
            raise GenericPositionViolated(f"N is not in generic position (meets {report.meet_dims})", report)
        dk, dl = split
        if dk == 0:
            return np.zeros((dl, 0), dtype=complex)
        B_K, B_L = N.basis[:dk], N.basis[dk:]
        # T B_K = B_L
        T = linalg.solve(B_K.T, B_L.T).T
        residual = self.halmos_residual(N, T)
        if residual > self.policy.eq_atol:
            raise HalmosIdentityViolated(f"K-block of the projection onto N differs from (I + T*T)^-1 by {residual:.3e}", residual)
        return T

    def halmos_residual(self, N: Subspace, T: ComplexMatrix) -> float:
        dk = T.shape[1]
        N11 = N.projector()[:dk, :dk]
        expected = np.linalg.inv(np.eye(dk, dtype=complex) + T.conj().T @ T)
        return frobenius(N11 - expected)

    def _slot(self, i: int, A: StinespringData, B: StinespringData, N: Subspace) -> Dict:
        pi, rho = A.reps[i], B.reps[i]
        split = (pi.dim, rho.dim)
        report = self.generic_position_check(N, split)
        if not report.passed:
            raise GenericPositionViolated(
                f"slot {i + 1}: N and K are not in generic position (meets {report.meet_dims}, dim N {report.dim_n}, split {split})",
                report,
                slot=i + 1,
            )
        T = self.graph_operator(N, split, report)
        W, absT = polar_decompose(T, self.policy)
        identity = np.eye(pi.dim, dtype=complex)
        return {
            "T": T,
            "W": W,
            "absT": absT,
            "report": report,
            "intertwine": max((frobenius(T @ p - r @ T) for p, r in zip(pi.images, rho.images)), default=0.0),
            "unitary_equiv": max((frobenius(W @ p @ W.conj().T - r) for p, r in zip(pi.images, rho.images)), default=0.0),
            "abs_commutation": max((frobenius(absT @ p - p @ absT) for p in pi.images), default=0.0),
            "unitarity": max(frobenius(W.conj().T @ W - identity), frobenius(W @ W.conj().T - identity)),
            "halmos": self.halmos_residual(N, T) if pi.dim else 0.0,
        }

    def construct_intertwiners(self, pair: MapInstance) -> IntertwinerResult:
        A, B = _pair_of(pair)
        reports = (self.analyzer.is_minimal(A), self.analyzer.is_minimal(B))
        if not all(report.minimal for report in reports):
            raise NotMinimal(
                f"both representations must be minimal (A: {reports[0].minimal}, B: {reports[1].minimal})", reports
            )
        equal, residual = phi_equal(A, B, self.policy)
        if not equal:
            raise MapsDiffer(f"the two representations define different maps (residual {residual:.3e})", residual)

        paired = self.paired_subspaces(pair)
        E = self.analyzer.right_chain(A)

        if self.max_workers and self.max_workers > 1:
            with ThreadPoolExecutor(max_workers=self.max_workers) as pool:
                slots = list(pool.map(lambda i: self._slot(i, A, B, paired.N[i]), range(A.k)))
        else:
            slots = [self._slot(i, A, B, paired.N[i]) for i in range(A.k)]
        T = [slot["T"] for slot in slots]

        k = A.k
        chain_res, chain_global = [], []
        for i in range(k - 1):
            gap = T[i] @ A.X[i + 1] - B.X[i + 1] @ T[i + 1]
            chain_res.append(frobenius(gap @ E[i + 1].projector()))
            chain_global.append(frobenius(gap))
        first_gap = A.X[0] - B.X[0] @ T[0]
        result = IntertwinerResult(
            T=T,
            W=[slot["W"] for slot in slots],
            absT=[slot["absT"] for slot in slots],
            generic_position=[slot["report"] for slot in slots],
            intertwine_res=[slot["intertwine"] for slot in slots],
            unitary_equiv_res=[slot["unitary_equiv"] for slot in slots],
            abs_commutation_res=[slot["abs_commutation"] for slot in slots],
            unitarity_res=[slot["unitarity"] for slot in slots],
            halmos_res=[slot["halmos"] for slot in slots],
            boundary_res_iii=frobenius(T[k - 1] @ A.X[k] - B.X[k]),
            chain_res_iv=chain_res,
            boundary_res_v_first=frobenius(first_gap @ E[0].projector()),
            boundary_res_v_second=frobenius(T[0].conj().T @ B.X[0].conj().T - A.X[0].conj().T),
            diagnostics={
                "containment_R_in_N": list(paired.containment_res),
                "chain_iv_global": chain_global,
                "boundary_v_first_global": [frobenius(first_gap)],
                "phi_equal": [residual],
            },
        )
        for i in range(k):
            logger.debug(
                "slot %d: intertwine %.2e, unitary %.2e, halmos %.2e",
                i + 1, result.intertwine_res[i], result.unitary_equiv_res[i], result.halmos_res[i],
            )
        return result


def exchange_residual(result: IntertwinerResult, swapped: IntertwinerResult) -> float:
    """max_i ||T_i' T_i - I|| for the intertwiners of a pair and of the swapped pair."""
    return max(
        (frobenius(Tp @ T - np.eye(T.shape[1], dtype=complex)) for T, Tp in zip(result.T, swapped.T)),
        default=0.0,
    )


def swap(pair: MapInstance) -> MapInstance:
    return MapInstance(pair.algebras, pair.representation_b, pair.representation_a)
