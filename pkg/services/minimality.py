import logging
from typing import List, Tuple

import numpy as np

from config import DEFAULT_POLICY, TolerancePolicy
from errors import DegenerateMap
from models import MinimalityReport, SpanChain, StinespringData, Subspace
from services.algebra import compress
from services.numerics import invariant_closure

logger = logging.getLogger(__name__)


class MinimalityAnalyzer:
    def __init__(self, policy: TolerancePolicy = DEFAULT_POLICY):
        self.policy = policy

    def right_chain(self, S: StinespringData) -> List[Subspace]:
        spaces: List[Subspace] = [None] * S.k
        current = S.X[S.k]
        for i in reversed(range(S.k)):
            spaces[i] = invariant_closure(current, S.reps[i].images, self.policy)
            current = S.X[i] @ spaces[i].basis
        return spaces

    def left_chain(self, S: StinespringData) -> List[Subspace]:
        spaces: List[Subspace] = []
        current = S.X[0].conj().T
        for i in range(S.k):
            spaces.append(invariant_closure(current, S.reps[i].images, self.policy))
            current = S.X[i + 1].conj().T @ spaces[i].basis
        return spaces

    def span_chain(self, S: StinespringData) -> SpanChain:
        return SpanChain(right=self.right_chain(S), left=self.left_chain(S))

    def is_minimal(self, S: StinespringData) -> MinimalityReport:
        chain = self.span_chain(S)
        report = MinimalityReport(
            slot_dims=S.dims,
            right_dims=[space.dim for space in chain.right],
            left_dims=[space.dim for space in chain.left],
        )
        logger.debug("span dims right=%s left=%s slots=%s", report.right_dims, report.left_dims, report.slot_dims)
        return report

    def reduce_to_minimal(
        self, S: StinespringData, allow_degenerate: bool = False
    ) -> Tuple[StinespringData, List[Subspace]]:
        reps = list(S.reps)
        X = list(S.X)
        projections: List[Subspace] = [None] * S.k
        degenerate = []

        # right to left; slot i only sees slots > i after they were reduced
        for i in reversed(range(S.k)):
            r = invariant_closure(X[i + 1], reps[i].images, self.policy)
            left = self.left_chain(StinespringData(tuple(reps), tuple(X)))[i]
            l = invariant_closure(r.projector() @ left.basis, reps[i].images, self.policy)
            projections[i] = l
            logger.debug("slot %d: dim %d, r %d, left span %d, l %d", i + 1, reps[i].dim, r.dim, left.dim, l.dim)
            if l.dim == 0:
                degenerate.append(i + 1)
            Q = l.basis
            reps[i] = compress(reps[i], Q)
            X[i] = X[i] @ Q
            X[i + 1] = Q.conj().T @ X[i + 1]

        reduced = StinespringData(tuple(reps), tuple(X))
        if degenerate:
            message = f"map vanishes along the chain; zero-dimensional slots {degenerate}"
            if not allow_degenerate:
                raise DegenerateMap(message, result=(reduced, projections))
            logger.warning(message)
        return reduced, projections

    def projection_commutation_residual(self, S: StinespringData, projections: List[Subspace]) -> float:
        """Largest commutator of a returned projection with its slot's generator images."""
        worst = 0.0
        for rep, space in zip(S.reps, projections):
            P = space.projector()
            for g in rep.images:
                worst = max(worst, float(np.linalg.norm(P @ g - g @ P)))
        return worst
