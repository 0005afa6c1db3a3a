"""Single-set streaming selector.

Keeps the m stream elements with the largest zero-point gradients (their mean
similarities) in a bounded min-heap, then fits the non-negative weights once
after the stream ends. An incoming element evicts the current minimum only on
a strictly larger value, so earlier elements win ties. Selection is
non-incremental: it never looks at what is already in the set.
"""
from __future__ import annotations

import heapq

import numpy as np

from . import nnqp
from .datatypes import DataPoint, Solution
from .errors import InputError
from .kernel import KernelConfig, kernel_matrix


class ProtoBasic:
    """Streaming top-m selection by zero-point gradient, single final solve."""

    def __init__(self, m: int, cfg: KernelConfig):
        if m < 1:
            raise InputError("m must be at least 1")
        self.m = m
        self.cfg = cfg
        # Heap entries are (value, -index): the root is the smallest value,
        # ties resolved so the larger index is evicted first.
        self._heap: list[tuple[float, int]] = []
        self._members: dict[int, tuple[DataPoint, float]] = {}
        self.offers = 0
        self.qp_solves = 0
        self.peak_tracked = 0

    @property
    def indices(self) -> list[int]:
        return sorted(self._members)

    def offer(self, index: int, point: DataPoint, mu_value: float) -> None:
        """Consider one stream element with its zero-point gradient."""
        self.offers += 1
        index = int(index)
        value = float(mu_value)
        if len(self._heap) < self.m:
            heapq.heappush(self._heap, (value, -index))
            self._members[index] = (point, value)
        elif value > self._heap[0][0]:
            _, neg = heapq.heapreplace(self._heap, (value, -index))
            del self._members[-neg]
            self._members[index] = (point, value)
        self.peak_tracked = max(self.peak_tracked, len(self._members))

    def finalize(self) -> Solution:
        """Fit weights for the kept set; empty stream gives the empty solution."""
        if not self._members:
            return Solution.empty()
        idx = self.indices
        points = [self._members[i][0] for i in idx]
        mu_sub = np.array([self._members[i][1] for i in idx])
        qp = nnqp.RestrictedQP(tuple(idx), mu_sub, kernel_matrix(points, self.cfg))
        sol = nnqp.solve(qp)
        self.qp_solves += 1
        return Solution(tuple(idx), sol.weights, sol.objective)


def select_prototypes(points, mu_values, cfg: KernelConfig, m: int):
    """Run the selector over a point list with precomputed mean similarities.

    ``mu_values`` is aligned with ``points``; element indices are taken from
    each point's stream_index. Returns (solution, engine) so callers can read
    the cost counters.
    """
    engine = ProtoBasic(m, cfg)
    for point, mu_j in zip(points, mu_values):
        engine.offer(point.stream_index, point, float(mu_j))
    return engine.finalize(), engine
