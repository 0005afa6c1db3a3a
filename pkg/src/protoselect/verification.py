"""Randomized numerical verification of the engine's approximation bounds.

Every bound the engines rely on is re-checked here on randomized instances
against the brute-force oracle: the marginal-gain sandwich, the
submodularity-ratio window, the constant-factor guarantees of both selection
rules, the full-set threshold bound, the peak-gradient window around the
optimum, and the adversarial function whose ratio grows without bound.

Checks regenerate their instances deterministically from (seed, trial), so
two checks given the same seed and geometry see the same instances.
"""
from __future__ import annotations

import dataclasses
import logging
import math

import numpy as np

from . import oracle
from .datatypes import DataPoint
from .errors import InputError
from .kernel import KernelConfig, kernel_eval, kernel_matrix, mean_vector, median_heuristic
from .protobasic import select_prototypes as basic_select
from .protostream import select_prototypes as stream_select

logger = logging.getLogger(__name__)

TOL = 1e-9


@dataclasses.dataclass
class Instance:
    points: list[DataPoint]
    X: np.ndarray
    mu: np.ndarray
    K: np.ndarray
    cfg: KernelConfig


@dataclasses.dataclass
class CheckResult:
    name: str
    trials: int
    violations: int
    skipped: int
    worst_margin: float
    seed: int
    passed: bool
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "trials": self.trials,
            "violations": self.violations,
            "skipped": self.skipped,
            "worst_margin": self.worst_margin,
            "seed": self.seed,
            "passed": self.passed,
            "note": self.note,
        }


def exact_mu_values(points, cfg: KernelConfig) -> np.ndarray:
    est = mean_vector(points, points, cfg)
    return np.array([est.values[p.stream_index] for p in points])


def random_cloud_instance(seed: int, n: int = 20, d: int = 2) -> Instance:
    """Standard-normal cloud with median-heuristic bandwidth and exact mu."""
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, d))
    points = [DataPoint(x, stream_index=i) for i, x in enumerate(X)]
    cfg = KernelConfig(median_heuristic(points))
    return Instance(points, X, exact_mu_values(points, cfg), kernel_matrix(points, cfg), cfg)


def mixture_points(seed: int, centers, per_class: int, std: float) -> list[DataPoint]:
    """Balanced labeled Gaussian mixture, classes interleaved in stream order."""
    rng = np.random.default_rng(seed)
    feats, labels = [], []
    for label, center in enumerate(centers):
        feats.append(rng.normal(loc=center, scale=std, size=(per_class, len(center))))
        labels.extend([label] * per_class)
    X = np.vstack(feats)
    labels = np.array(labels)
    order = rng.permutation(len(labels))
    return [
        DataPoint(X[j], label=int(labels[j]), stream_index=i) for i, j in enumerate(order)
    ]


def run_protobasic(points, cfg: KernelConfig, m: int, mu: np.ndarray | None = None):
    if mu is None:
        mu = exact_mu_values(points, cfg)
    return basic_select(points, mu, cfg, m)


def run_protostream(points, cfg: KernelConfig, m: int, epsilon: float = 0.4,
                    mu: np.ndarray | None = None):
    if mu is None:
        mu = exact_mu_values(points, cfg)
    return stream_select(points, mu, cfg, m, epsilon)


def _draw_disjoint(rng: np.random.Generator, n: int, max_l: int, max_s: int,
                   max_total: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    size_l = int(rng.integers(0, max_l + 1))
    size_s = int(rng.integers(1, min(max_s, max_total - size_l) + 1))
    picks = rng.choice(n, size=size_l + size_s, replace=False)
    return tuple(sorted(int(i) for i in picks[:size_l])), tuple(
        sorted(int(i) for i in picks[size_l:])
    )


def check_gain_sandwich(trials: int = 200, seed: int = 0, n: int = 12) -> CheckResult:
    """Joint gain of appending S is sandwiched by the clamped-gradient norm
    scaled by the sparse curvature constants at k = |L| + |S|."""
    violations = skipped = 0
    worst = math.inf
    for t in range(trials):
        inst = random_cloud_instance(seed + t, n=n)
        rng = np.random.default_rng([seed, t, 1])
        L, S = _draw_disjoint(rng, n, max_l=3, max_s=3, max_total=6)
        k = len(L) + len(S)
        params = oracle.rsc_rsm_constants(inst.K, k)
        sol_L = oracle.solve_support(inst.mu, inst.K, L)
        f_L = sol_L.objective
        f_LS = oracle.solve_support(inst.mu, inst.K, L + S).objective
        gain = f_LS - f_L
        S_idx = np.array(S)
        if L:
            grad_S = inst.mu[S_idx] - inst.K[np.ix_(S_idx, np.array(L))] @ sol_L.weights
        else:
            grad_S = inst.mu[S_idx]
        norm2 = float(np.sum(np.maximum(grad_S, 0.0) ** 2))
        lower = norm2 / (2.0 * params.C_tilde[k])
        slack_lower = gain - lower
        if params.c[k] <= 1e-15:
            skipped += 1
            logger.info("gain_sandwich trial %d: c_%d = 0, upper bound skipped", t, k)
            slack = slack_lower
        else:
            upper = norm2 / (2.0 * params.c[k])
            slack = min(slack_lower, upper - gain)
        worst = min(worst, slack)
        if slack < -TOL:
            violations += 1
    return CheckResult("gain_sandwich", trials, violations, skipped, worst, seed,
                       violations == 0)


def check_ratio_bounds(trials: int = 200, seed: int = 0, n: int = 12) -> CheckResult:
    """The submodularity ratio lies in [c_{|L|+|S|}/C1, C_{|S|}/c_{|L|+1}]."""
    violations = skipped = 0
    worst = math.inf
    for t in range(trials):
        inst = random_cloud_instance(seed + t, n=n)
        rng = np.random.default_rng([seed, t, 2])
        L, S = _draw_disjoint(rng, n, max_l=3, max_s=3, max_total=5)
        k = len(L) + len(S)
        ratio = oracle.submodularity_ratio(inst.mu, inst.K, L, S)
        if ratio.degenerate:
            skipped += 1
            continue
        params = oracle.rsc_rsm_constants(inst.K, k)
        c_l1 = params.c[len(L) + 1]
        if c_l1 <= 1e-15:
            skipped += 1
            logger.info("ratio_bounds trial %d: c_%d = 0, skipped", t, len(L) + 1)
            continue
        lower = params.c[k] / params.C_tilde[1]
        upper = params.C_tilde[len(S)] / c_l1
        slack = min(ratio.gamma - lower, upper - ratio.gamma)
        worst = min(worst, slack)
        if slack < -TOL:
            violations += 1
    return CheckResult("ratio_bounds", trials, violations, skipped, worst, seed,
                       violations == 0)


def check_basic_constant_factor(trials: int = 200, seed: int = 0, n: int = 20,
                                m: int = 3) -> CheckResult:
    """Top-gradient streaming selection is within c_m/C_m of the optimum."""
    violations = 0
    worst = math.inf
    for t in range(trials):
        inst = random_cloud_instance(seed + t, n=n)
        solution, _ = run_protobasic(inst.points, inst.cfg, m, mu=inst.mu)
        _, f_star = oracle.exhaustive_optimum(inst.mu, inst.K, m)
        params = oracle.rsc_rsm_constants(inst.K, m)
        slack = solution.objective - params.kappa(m) * f_star
        worst = min(worst, slack)
        if slack < -TOL:
            violations += 1
    return CheckResult("basic_constant_factor", trials, violations, 0, worst, seed,
                       violations == 0)


def check_peak_gradient_window(trials: int = 200, seed: int = 0, n: int = 20,
                               m: int = 3) -> CheckResult:
    """The optimum lies under rho*m/(2 c_m) and above rho/(2 C1) in value.

    Runs on the same instances as check_basic_constant_factor for a given
    seed and geometry.
    """
    violations = skipped = 0
    worst = math.inf
    for t in range(trials):
        inst = random_cloud_instance(seed + t, n=n)
        rho = float(np.max(np.maximum(inst.mu, 0.0) ** 2))
        _, f_star = oracle.exhaustive_optimum(inst.mu, inst.K, m)
        params = oracle.rsc_rsm_constants(inst.K, m)
        c_m = params.c[m]
        C_1 = params.C_tilde[1]
        if c_m <= 1e-15:
            skipped += 1
            logger.info("peak_gradient_window trial %d: c_%d = 0, skipped", t, m)
            continue
        slack_upper = rho * m / (2.0 * c_m) - f_star
        slack_lower = c_m * f_star - c_m * rho / (2.0 * C_1)
        slack = min(slack_upper, slack_lower)
        worst = min(worst, slack)
        if slack < -TOL:
            violations += 1
    return CheckResult("peak_gradient_window", trials, violations, skipped, worst, seed,
                       violations == 0)


def check_small_m_singleton(trials: int = 200, seed: int = 0, n: int = 20,
                            m: int = 3) -> CheckResult:
    """When c_m/C1 <= 1/m, the best singleton alone is a (c_m/C1)^2 factor.

    Instances not satisfying the premise are counted as skipped.
    """
    violations = skipped = 0
    worst = math.inf
    for t in range(trials):
        inst = random_cloud_instance(seed + t, n=n)
        params = oracle.rsc_rsm_constants(inst.K, m)
        c_m, C_1 = params.c[m], params.C_tilde[1]
        if c_m <= 1e-15 or c_m / C_1 > 1.0 / m:
            skipped += 1
            continue
        p = int(np.argmax(inst.mu))
        f_p = oracle.subset_objective(inst.mu, inst.K, (p,))
        _, f_star = oracle.exhaustive_optimum(inst.mu, inst.K, m)
        slack = f_p - (c_m**2 / C_1**2) * f_star
        worst = min(worst, slack)
        if slack < -TOL:
            violations += 1
    return CheckResult("small_m_singleton", trials, violations, skipped, worst, seed,
                       violations == 0)


def check_singleton_ratio_factor(trials: int = 50, seed: int = 0, n: int = 12,
                                 m: int = 3) -> CheckResult:
    """Selection by largest singleton value is within r_m/R_m of the optimum,
    with r_m and R_m the exhaustive extremes of the empty-set ratio.

    Also asserts that for this objective the top-mu set equals the top
    singleton-value set (unit diagonal makes the map monotone).
    """
    violations = 0
    worst = math.inf
    note = ""
    for t in range(trials):
        inst = random_cloud_instance(seed + t, n=n)
        r_m, R_m = oracle.singleton_ratio_extremes(inst.mu, inst.K, m)
        solution, _ = run_protobasic(inst.points, inst.cfg, m, mu=inst.mu)
        _, f_star = oracle.exhaustive_optimum(inst.mu, inst.K, m)
        slack = solution.objective - (r_m / R_m) * f_star
        worst = min(worst, slack)
        if slack < -TOL:
            violations += 1
        table = oracle.subset_objectives_upto(inst.mu, inst.K, 1)
        by_singleton = sorted(range(n), key=lambda j: (-table[(j,)], j))[:m]
        if set(by_singleton) != set(solution.indices):
            violations += 1
            note = f"top-mu set differs from top singleton-value set at trial {t}"
    return CheckResult("singleton_ratio_factor", trials, violations, 0, worst, seed,
                       violations == 0, note)


def check_full_set_threshold(trials: int = 50, seed: int = 0, clusters: int = 10,
                             m: int = 3, epsilon: float = 0.4) -> CheckResult:
    """Candidate sets that reach capacity have objective at least tau/C1, and
    every accepted append raises the objective by at least tau/(C1*m).

    Instances are tight multi-cluster mixtures with a narrowed bandwidth so
    low thresholds actually fill their sets.
    """
    violations = 0
    full_sets = 0
    worst = math.inf
    for t in range(trials):
        centers = np.random.default_rng([seed, t, 3]).uniform(-4.0, 4.0, size=(clusters, 2))
        points = mixture_points(seed + t, centers=centers, per_class=12, std=0.3)
        cfg = KernelConfig(median_heuristic(points) * 0.5)
        _, engine = run_protostream(points, cfg, m, epsilon)
        C_1 = max(kernel_eval(p, p, cfg) for p in points)
        for exponent in sorted(engine.sets):
            cs = engine.sets[exponent]
            if len(cs.indices) == m:
                full_sets += 1
                slack = cs.solution.objective - cs.tau / C_1
                worst = min(worst, slack)
                if slack < -TOL:
                    violations += 1
        for tau, before, after in engine.append_log:
            slack = (after - before) - tau / (C_1 * m)
            worst = min(worst, slack)
            if slack < -TOL:
                violations += 1
    note = f"{full_sets} candidate sets reached capacity"
    return CheckResult("full_set_threshold", trials, violations, 0, worst, seed,
                       violations == 0, note)


def check_unbounded_ratio_example(k_max: int = 10) -> CheckResult:
    """The adversarial min-count function has ratio exactly k for every k."""
    violations = 0
    worst_diff = 0.0
    for k in range(1, k_max + 1):
        gamma = oracle.impossibility_gamma(k)
        diff = abs(gamma - float(k))
        worst_diff = max(worst_diff, diff)
        if gamma != float(k):
            violations += 1
    return CheckResult("unbounded_ratio_example", k_max, violations, 0, -worst_diff, 0,
                       violations == 0)


def run_all(seed: int = 0, trials: int = 200) -> list[CheckResult]:
    """Full verification sweep; every check must pass."""
    if trials < 1:
        raise InputError("trials must be at least 1")
    small = max(trials // 4, 10)
    return [
        check_gain_sandwich(trials, seed),
        check_ratio_bounds(trials, seed),
        check_basic_constant_factor(trials, seed),
        check_peak_gradient_window(trials, seed),
        check_small_m_singleton(trials, seed),
        check_singleton_ratio_factor(small, seed),
        check_full_set_threshold(small, seed),
        check_unbounded_ratio_example(),
    ]
