"""Restricted non-negative quadratic solver.

Maximizes l(w) = mu.w - 0.5 * w.K.w over w >= 0 with the support restricted
to a fixed index set. The solver is projected gradient ascent with step
1/lambda_max (lambda_max estimated by power iteration), with a periodic
active-set polish so that near-singular supports (near-duplicate points)
still reach the KKT tolerance within the iteration cap. Optimality is
certified by the KKT residual: on positive coordinates the gradient must
vanish, on zero coordinates it must be non-positive.
"""
from __future__ import annotations

import dataclasses

import numpy as np

from .errors import ConvergenceError, InputError, NumericalError

KKT_TOL = 1e-8
PSD_TOL = 1e-10
POWER_ITERATIONS = 50
_POLISH_EVERY = 25


@dataclasses.dataclass
class RestrictedQP:
    """One restriction of the quadratic objective to an ordered support set."""

    support: tuple[int, ...]
    mu_sub: np.ndarray
    K_sub: np.ndarray

    def __post_init__(self):
        self.support = tuple(int(i) for i in self.support)
        self.mu_sub = np.asarray(self.mu_sub, dtype=float).reshape(-1)
        self.K_sub = np.asarray(self.K_sub, dtype=float)
        k = len(self.support)
        if self.mu_sub.shape != (k,) or self.K_sub.shape != (k, k):
            raise InputError("RestrictedQP dimensions do not match the support size")
        if k and np.max(np.abs(self.K_sub - self.K_sub.T)) > 1e-12:
            raise InputError("K_sub must be symmetric to 1e-12")


@dataclasses.dataclass
class QPSolution:
    """Non-negative weights over the support with the attained objective."""

    weights: np.ndarray
    objective: float
    kkt_residual: float


def objective_value(mu: np.ndarray, K: np.ndarray, w: np.ndarray) -> float:
    return float(w @ mu - 0.5 * (w @ K @ w))


def objective_gradient(mu: np.ndarray, K: np.ndarray, w: np.ndarray) -> np.ndarray:
    return mu - K @ w


def gradient(mu_j: float, kernel_row_values: np.ndarray, weights: np.ndarray) -> float:
    """Residual gradient of one candidate coordinate at the current weights.

    At zero weights this is exactly mu_j.
    """
    if len(weights) == 0:
        return float(mu_j)
    return float(mu_j - kernel_row_values @ weights)


def kkt_residual(w: np.ndarray, g: np.ndarray) -> float:
    if len(w) == 0:
        return 0.0
    per_coord = np.where(w > 0.0, np.abs(g), np.maximum(g, 0.0))
    return float(np.max(per_coord))


def _lambda_max_power(K: np.ndarray, iterations: int = POWER_ITERATIONS) -> float:
    k = K.shape[0]
    # Deterministic start, tilted so it is not orthogonal to the top eigenvector
    # for symmetric sign patterns.
    v = 1.0 + 1e-3 * np.arange(k)
    v /= np.linalg.norm(v)
    lam = float(v @ K @ v)
    for _ in range(iterations):
        u = K @ v
        norm = np.linalg.norm(u)
        if norm == 0.0:
            lam = 0.0
            break
        v = u / norm
        new_lam = float(v @ K @ v)
        if abs(new_lam - lam) <= 1e-13 * max(abs(new_lam), 1.0):
            lam = new_lam
            break
        lam = new_lam
    return max(lam, float(np.max(np.diag(K))), 1e-12)


def _polish(mu: np.ndarray, K: np.ndarray, w: np.ndarray, g: np.ndarray, tol: float):
    """Active-set pivot solve seeded by the current iterate.

    Solves the face system directly, drops the most negative coordinate while
    infeasible, admits the worst violated coordinate while suboptimal, and
    accepts only a point passing the KKT check. Returns None on a pivot-budget
    dead end, in which case gradient ascent simply continues.
    """
    k = len(w)
    active = (w > 0.0) | (g > 0.0)
    for _ in range(4 * k + 8):
        if not active.any():
            candidate = np.zeros(k)
        else:
            z, *_ = np.linalg.lstsq(K[np.ix_(active, active)], mu[active], rcond=None)
            if z.min() < -1e-12:
                drop = np.flatnonzero(active)[int(np.argmin(z))]
                active[drop] = False
                continue
            candidate = np.zeros(k)
            candidate[active] = np.maximum(z, 0.0)
        g_c = objective_gradient(mu, K, candidate)
        residual = kkt_residual(candidate, g_c)
        if residual <= tol:
            return candidate, residual
        outside = ~active
        if outside.any() and np.max(g_c[outside]) > 0.0:
            add = np.flatnonzero(outside)[int(np.argmax(g_c[outside]))]
            active[add] = True
            continue
        return None
    return None


def solve(qp: RestrictedQP, start: np.ndarray | None = None, tol: float = KKT_TOL) -> QPSolution:
    """Solve one restricted QP; deterministic given its inputs.

    Raises NumericalError if K_sub is not PSD to -1e-10, and ConvergenceError
    (carrying the best iterate) if the KKT tolerance is not reached within
    10*k^2 + 1000 iterations.
    """
    k = len(qp.support)
    if k == 0:
        return QPSolution(np.zeros(0), 0.0, 0.0)
    K, mu = qp.K_sub, qp.mu_sub
    lam_min = float(np.linalg.eigvalsh(K)[0])
    if lam_min < -PSD_TOL:
        raise NumericalError(f"K_sub is not PSD: min eigenvalue {lam_min:.3e}")

    step = 1.0 / _lambda_max_power(K)
    if start is None:
        w = np.zeros(k)
    else:
        w = np.maximum(np.asarray(start, dtype=float).reshape(-1), 0.0)
        if w.shape != (k,):
            raise InputError("warm start length does not match the support size")

    best_w, best_res = w, np.inf
    max_iter = 10 * k * k + 1000
    for it in range(max_iter + 1):
        g = objective_gradient(mu, K, w)
        res = kkt_residual(w, g)
        if res <= tol:
            return QPSolution(w.copy(), objective_value(mu, K, w), res)
        if res < best_res:
            best_w, best_res = w.copy(), res
        if it % _POLISH_EVERY == _POLISH_EVERY - 1:
            polished = _polish(mu, K, w, g, tol)
            if polished is not None:
                pw, pres = polished
                return QPSolution(pw, objective_value(mu, K, pw), pres)
        w = np.maximum(w + step * g, 0.0)

    best = QPSolution(best_w, objective_value(mu, K, best_w), best_res)
    raise ConvergenceError(
        f"no convergence after {max_iter} iterations (residual {best_res:.3e})", best=best
    )


def solve_warm(qp: RestrictedQP, start: QPSolution, tol: float = KKT_TOL) -> QPSolution:
    """Re-solve after a support change, starting from a padded previous optimum."""
    return solve(qp, start=start.weights, tol=tol)
