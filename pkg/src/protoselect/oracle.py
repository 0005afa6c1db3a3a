"""Desk-scale ground truth for the quadratic set objective.

Provides the exhaustive optimal subset, a batch forward-selection baseline,
sparse curvature constants from principal submatrices, submodularity-ratio
evaluation, and an adversarial set function whose ratio grows without bound.
Everything here is budget-guarded brute force meant for verification, not
for production-size inputs.
"""
from __future__ import annotations

import dataclasses
import functools
import itertools

import numpy as np

from . import nnqp
from .datatypes import Solution
from .errors import InputError

MAX_N = 25
MAX_M = 4
MAX_K = 6

_FEAS_TOL = 1e-12


@dataclasses.dataclass
class RscRsmParams:
    """Curvature bounds of the quadratic over k-sparse supports.

    c[k] is the smallest eigenvalue over all size-k principal submatrices,
    C_tilde[k] the largest; c is non-increasing and C_tilde non-decreasing.
    """

    c: dict[int, float]
    C_tilde: dict[int, float]

    def kappa(self, m: int) -> float:
        return self.c[m] / self.C_tilde[m]


@dataclasses.dataclass
class SubmodularityRatio:
    """Summed singleton gains over the joint gain for disjoint sets L, S."""

    L: tuple[int, ...]
    S: tuple[int, ...]
    gamma: float | None
    degenerate: bool


@functools.lru_cache(maxsize=None)
def _combo_array(n: int, k: int) -> np.ndarray:
    return np.array(list(itertools.combinations(range(n), k)), dtype=int)


def _stationary_values(mu: np.ndarray, K: np.ndarray, k: int):
    """Unconstrained stationary value on every size-k support, where feasible.

    Returns (combos, values); values is -inf where the stationary point has a
    negative coordinate (the optimum of that support lives on a sub-face).
    """
    combos = _combo_array(len(mu), k)
    if combos.size == 0:
        return combos, np.zeros(0)
    Ksub = K[combos[:, :, None], combos[:, None, :]]
    musub = mu[combos]
    try:
        w = np.linalg.solve(Ksub, musub[..., None])[..., 0]
    except np.linalg.LinAlgError:
        w = np.empty_like(musub)
        for i in range(len(combos)):
            try:
                w[i] = np.linalg.solve(Ksub[i], musub[i])
            except np.linalg.LinAlgError:
                w[i] = np.linalg.lstsq(Ksub[i], musub[i], rcond=None)[0]
    feasible = np.isfinite(w).all(axis=1) & (w >= -_FEAS_TOL).all(axis=1)
    values = np.where(feasible, 0.5 * np.einsum("ck,ck->c", musub, np.maximum(w, 0.0)), -np.inf)
    return combos, values


def _check_budget(n: int, m: int) -> None:
    if n > MAX_N or m > MAX_M:
        raise InputError(f"enumeration budget exceeded (n={n} <= {MAX_N}, m={m} <= {MAX_M})")


def subset_objective(mu: np.ndarray, K: np.ndarray, subset) -> float:
    """f(L) by enumerating every sign-feasible face of L; independent of the
    iterative solver."""
    mu = np.asarray(mu, dtype=float)
    K = np.asarray(K, dtype=float)
    subset = tuple(subset)
    best = 0.0
    for size in range(1, len(subset) + 1):
        for face in itertools.combinations(subset, size):
            idx = np.array(face)
            Ksub = K[np.ix_(idx, idx)]
            musub = mu[idx]
            try:
                w = np.linalg.solve(Ksub, musub)
            except np.linalg.LinAlgError:
                w = np.linalg.lstsq(Ksub, musub, rcond=None)[0]
            if np.isfinite(w).all() and (w >= -_FEAS_TOL).all():
                best = max(best, 0.5 * float(musub @ np.maximum(w, 0.0)))
    return best


def exhaustive_optimum(mu, K, m: int) -> tuple[tuple[int, ...], float]:
    """Optimal subset of size <= m by exhaustive search.

    Ties resolve to the first subset in (size, lexicographic) order.
    """
    mu = np.asarray(mu, dtype=float)
    K = np.asarray(K, dtype=float)
    n = len(mu)
    if m < 1:
        raise InputError("m must be at least 1")
    _check_budget(n, m)
    best_set: tuple[int, ...] = ()
    best_val = 0.0
    for k in range(1, min(m, n) + 1):
        combos, values = _stationary_values(mu, K, k)
        if values.size == 0:
            continue
        i = int(np.argmax(values))
        if values[i] > best_val:
            best_val = float(values[i])
            best_set = tuple(int(j) for j in combos[i])
    return best_set, best_val


def subset_objectives_upto(mu, K, m: int) -> dict[tuple[int, ...], float]:
    """f(L) for every subset of size <= m, from the stationary-face table."""
    mu = np.asarray(mu, dtype=float)
    K = np.asarray(K, dtype=float)
    n = len(mu)
    _check_budget(n, m)
    face_vals: dict[tuple[int, ...], float] = {}
    for k in range(1, min(m, n) + 1):
        combos, values = _stationary_values(mu, K, k)
        for combo, val in zip(combos, values):
            face_vals[tuple(int(j) for j in combo)] = float(val)
    out: dict[tuple[int, ...], float] = {(): 0.0}
    for subset in face_vals:
        best = 0.0
        for size in range(1, len(subset) + 1):
            for face in itertools.combinations(subset, size):
                v = face_vals.get(face, -np.inf)
                if v > best:
                    best = v
        out[subset] = best
    return out


def singleton_ratio_extremes(mu, K, m: int) -> tuple[float, float]:
    """Smallest and largest ratio of summed singleton values to the set value
    over all size-m subsets; the extremes of gamma relative to the empty set."""
    table = subset_objectives_upto(mu, K, m)
    n = len(np.asarray(mu))
    lo, hi = np.inf, -np.inf
    for subset in itertools.combinations(range(n), m):
        denom = table[subset]
        if denom <= 1e-12:
            continue
        num = sum(table[(j,)] for j in subset)
        gamma = num / denom
        lo = min(lo, gamma)
        hi = max(hi, gamma)
    if not np.isfinite(lo):
        raise InputError("no size-m subset has a positive objective")
    return float(lo), float(hi)


def solve_support(mu: np.ndarray, K: np.ndarray, subset) -> nnqp.QPSolution:
    idx = np.array(sorted(int(j) for j in subset), dtype=int)
    if idx.size == 0:
        return nnqp.QPSolution(np.zeros(0), 0.0, 0.0)
    qp = nnqp.RestrictedQP(tuple(idx), mu[idx], K[np.ix_(idx, idx)])
    return nnqp.solve(qp)


def batch_greedy(mu, K, m: int) -> Solution:
    """Forward selection: m rounds, each adding the element whose restricted
    solve gives the largest objective. Stops early once no candidate improves.

    Candidates with a non-positive residual gradient cannot improve the
    objective and are skipped without a solve.
    """
    mu = np.asarray(mu, dtype=float)
    K = np.asarray(K, dtype=float)
    n = len(mu)
    chosen: list[int] = []
    weights = np.zeros(0)
    current = 0.0
    for _ in range(min(m, n)):
        g = mu - K[:, chosen] @ weights if chosen else mu.copy()
        best_j = -1
        best_val = current
        best_sol = None
        for j in range(n):
            if j in chosen or g[j] <= 0.0:
                continue
            support = sorted(chosen + [j])
            qp = nnqp.RestrictedQP(tuple(support), mu[support], K[np.ix_(support, support)])
            start = np.zeros(len(support))
            for pos, idx in enumerate(support):
                if idx != j:
                    start[pos] = weights[chosen.index(idx)]
            sol = nnqp.solve(qp, start=start)
            if sol.objective > best_val:
                best_j, best_val, best_sol = j, sol.objective, sol
        if best_j < 0:
            break
        chosen.append(best_j)
        order = sorted(chosen)
        weights = np.array([best_sol.weights[order.index(i)] for i in chosen])
        current = best_val
    order = sorted(chosen)
    aligned = np.array([weights[chosen.index(i)] for i in order]) if chosen else np.zeros(0)
    return Solution(tuple(order), aligned, current)


def rsc_rsm_constants(K, k_max: int) -> RscRsmParams:
    """Extreme eigenvalues over all principal submatrices of size 1..k_max."""
    K = np.asarray(K, dtype=float)
    n = K.shape[0]
    if k_max < 1:
        raise InputError("k_max must be at least 1")
    if n > MAX_N or k_max > MAX_K:
        raise InputError(f"enumeration budget exceeded (n={n} <= {MAX_N}, k={k_max} <= {MAX_K})")
    c: dict[int, float] = {}
    C: dict[int, float] = {}
    for k in range(1, min(k_max, n) + 1):
        combos = _combo_array(n, k)
        Ksub = K[combos[:, :, None], combos[:, None, :]]
        eigs = np.linalg.eigvalsh(Ksub)
        c[k] = max(float(eigs[:, 0].min()), 0.0)
        C[k] = float(eigs[:, -1].max())
    return RscRsmParams(c=c, C_tilde=C)


def submodularity_ratio(mu, K, L, S) -> SubmodularityRatio:
    """gamma_{L,S} via |S| + 2 restricted solves; degenerate when the joint
    gain is (numerically) zero."""
    mu = np.asarray(mu, dtype=float)
    K = np.asarray(K, dtype=float)
    L = tuple(sorted(int(i) for i in L))
    S = tuple(sorted(int(i) for i in S))
    if set(L) & set(S):
        raise InputError("L and S must be disjoint")
    f_L = solve_support(mu, K, L).objective
    f_LS = solve_support(mu, K, L + S).objective
    denom = f_LS - f_L
    if denom <= 1e-12:
        return SubmodularityRatio(L, S, None, True)
    num = sum(solve_support(mu, K, L + (j,)).objective - f_L for j in S)
    return SubmodularityRatio(L, S, float(num / denom), False)


def impossibility_gamma(k: int) -> float:
    """Ratio gamma relative to the empty set for the adversarial min-count
    function built on two disjoint ground sets of size k; equals k exactly."""
    if k < 1:
        raise InputError("k must be at least 1")
    U = frozenset(range(k))
    V = frozenset(range(k, 2 * k))

    def fk(subset: frozenset) -> float:
        return float(min(2 * len(subset & U) + 1, 2 * len(subset & V)))

    base = fk(frozenset())
    num = sum(fk(frozenset({j})) - base for j in V)
    den = fk(V) - base
    return num / den
