"""Threshold-ladder streaming selector.

A geometric family of acceptance thresholds tau = (1+eps)^i spans the window
[rho/(2m), rho*m/2], where rho is the largest squared clamped zero-point
gradient seen so far. Each live threshold owns an independent candidate set.
An incoming element joins every set below capacity m whose residual gradient
clears sqrt(2*tau/m), and that set's weights are re-fit immediately. When rho
grows, thresholds entering the window start empty (no past element could
have qualified for them) and thresholds falling below it are dropped for
good. The final answer is the best of all candidate sets and the best
singleton seen.

Elements rejected by every set cost only gradient evaluations; a restricted
QP solve happens only on acceptance. Candidate sets are independent of each
other, so the per-element loop over thresholds may run in parallel with one
synchronization point per element; ladder bookkeeping (rho, instantiate and
drop) has a single writer.
"""
from __future__ import annotations

import dataclasses
import math

import numpy as np

from . import nnqp
from .datatypes import DataPoint, Solution
from .errors import InputError
from .kernel import KernelConfig, kernel_row


@dataclasses.dataclass
class CandidateSet:
    """Working state of one threshold: members, cached kernel block, weights."""

    tau: float
    indices: list[int]
    features: np.ndarray
    mu_sub: np.ndarray
    K_sub: np.ndarray
    solution: nnqp.QPSolution

    @classmethod
    def empty(cls, tau: float, dim: int) -> "CandidateSet":
        return cls(
            tau=tau,
            indices=[],
            features=np.zeros((0, dim)),
            mu_sub=np.zeros(0),
            K_sub=np.zeros((0, 0)),
            solution=nnqp.QPSolution(np.zeros(0), 0.0, 0.0),
        )


class ProtoStream:
    """Streaming selection over a geometric threshold ladder."""

    def __init__(self, m: int, epsilon: float, cfg: KernelConfig, dim: int):
        if m < 1:
            raise InputError("m must be at least 1")
        if not epsilon > 0:
            raise InputError("epsilon must be positive")
        self.m = m
        self.epsilon = epsilon
        self.cfg = cfg
        self.dim = dim
        self._log_ratio = math.log1p(epsilon)
        self.sets: dict[int, CandidateSet] = {}
        self.rho = 0.0
        self.best_singleton: tuple[int, float, DataPoint] | None = None
        # Cost accounting.
        self.offers = 0
        self.zero_gradient_evals = 0
        self.residual_gradient_evals = 0
        self.qp_solves = 0
        self.finalize_qp_solves = 0
        self.rejected_objective_evals = 0
        self.per_element_gradient_evals: list[int] = []
        self.per_element_qp_solves: list[int] = []
        self.live_set_counts: list[int] = []
        # (tau, objective before, objective after) per accepted append.
        self.append_log: list[tuple[float, float, float]] = []
        # (exponent, offer number at instantiation) for replay checks.
        self.instantiation_log: list[tuple[int, int]] = []

    def exponent_window(self) -> tuple[int, int] | None:
        """Integer exponents i with rho/(2m) <= (1+eps)^i <= rho*m/2.

        Computed in log space with a small fuzz so exact endpoints stay
        inside despite rounding.
        """
        if self.rho <= 0.0:
            return None
        lo = math.ceil(math.log(self.rho / (2.0 * self.m)) / self._log_ratio - 1e-9)
        hi = math.floor(math.log(self.rho * self.m / 2.0) / self._log_ratio + 1e-9)
        return lo, hi

    def live_taus(self) -> list[float]:
        return [self.sets[e].tau for e in sorted(self.sets)]

    def _refresh_ladder(self) -> None:
        window = self.exponent_window()
        if window is None:
            return
        lo, hi = window
        for e in [e for e in self.sets if e < lo]:
            del self.sets[e]
        for e in range(lo, hi + 1):
            if e not in self.sets:
                self.sets[e] = CandidateSet.empty((1.0 + self.epsilon) ** e, self.dim)
                self.instantiation_log.append((e, self.offers))

    def offer(self, index: int, point: DataPoint, mu_value: float) -> None:
        """Stream one element: update the ladder, then test every live set."""
        self.offers += 1
        self.zero_gradient_evals += 1
        index = int(index)
        mu_value = float(mu_value)

        clamped = max(mu_value, 0.0)
        if clamped * clamped > self.rho:
            self.rho = clamped * clamped
            self.best_singleton = (index, mu_value, point)
            self._refresh_ladder()

        gradient_evals = 0
        solves = 0
        for e in sorted(self.sets):
            cs = self.sets[e]
            if len(cs.indices) >= self.m:
                continue
            row = kernel_row(point.features, cs.features, self.cfg)
            gradient_evals += 1
            g = nnqp.gradient(mu_value, row, cs.solution.weights)
            if g >= math.sqrt(2.0 * cs.tau / self.m):
                self._append(cs, index, point, mu_value, row)
                solves += 1

        self.residual_gradient_evals += gradient_evals
        self.per_element_gradient_evals.append(gradient_evals)
        self.per_element_qp_solves.append(solves)
        self.live_set_counts.append(len(self.sets))

    def _append(self, cs: CandidateSet, index: int, point: DataPoint, mu_value: float,
                row: np.ndarray) -> None:
        k = len(cs.indices)
        grown = np.empty((k + 1, k + 1))
        grown[:k, :k] = cs.K_sub
        grown[k, :k] = row
        grown[:k, k] = row
        grown[k, k] = float(kernel_row(point.features, point.features[None, :], self.cfg)[0])
        cs.K_sub = grown
        cs.mu_sub = np.append(cs.mu_sub, mu_value)
        cs.features = np.vstack([cs.features, point.features])
        cs.indices.append(index)

        before = cs.solution.objective
        qp = nnqp.RestrictedQP(tuple(cs.indices), cs.mu_sub, cs.K_sub)
        padded = nnqp.QPSolution(
            np.append(cs.solution.weights, 0.0), before, cs.solution.kkt_residual
        )
        cs.solution = nnqp.solve_warm(qp, padded)
        self.qp_solves += 1
        self.append_log.append((cs.tau, before, cs.solution.objective))

    def finalize(self) -> Solution:
        """Best of the best singleton and all live sets; empty if nothing
        beats the empty set. Ties favor the singleton, then smaller tau."""
        best = Solution.empty()
        candidates = []
        if self.best_singleton is not None:
            index, mu_value, point = self.best_singleton
            diag = float(kernel_row(point.features, point.features[None, :], self.cfg)[0])
            qp = nnqp.RestrictedQP((index,), np.array([mu_value]), np.array([[diag]]))
            sol = nnqp.solve(qp)
            self.finalize_qp_solves += 1
            candidates.append(((index,), sol))
        for e in sorted(self.sets):
            cs = self.sets[e]
            candidates.append((tuple(cs.indices), cs.solution))
        for indices, sol in candidates:
            if sol.objective > best.objective:
                order = np.argsort(indices)
                best = Solution(
                    tuple(indices[i] for i in order),
                    sol.weights[order],
                    sol.objective,
                )
        return best


def select_prototypes(points, mu_values, cfg: KernelConfig, m: int, epsilon: float = 0.4):
    """Run the selector over a point list with precomputed mean similarities.

    Returns (solution, engine) so callers can read the cost counters.
    """
    points = list(points)
    if not points:
        return Solution.empty(), ProtoStream(m, epsilon, cfg, dim=1)
    engine = ProtoStream(m, epsilon, cfg, dim=points[0].features.shape[0])
    for point, mu_j in zip(points, mu_values):
        engine.offer(point.stream_index, point, float(mu_j))
    return engine.finalize(), engine
