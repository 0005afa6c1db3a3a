"""Command-line entry point.

Two subcommands: ``run`` streams a CSV dataset through one of the selection
algorithms and writes a JSON report; ``verify`` executes the randomized
bound-verification suite. Exit codes: 0 success, 1 input error,
2 verification failure, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time

import numpy as np

from . import evaluation, oracle, verification
from .datatypes import DataPoint, Solution, load_points_csv
from .errors import ConvergenceError, InputError, NumericalError
from .kernel import (
    KernelConfig,
    mean_vector,
    median_heuristic,
    reservoir_estimate,
    streaming_mean,
    target_mean,
    update_streaming_mean,
)
from .protobasic import ProtoBasic
from .protostream import ProtoStream

ALGORITHMS = ("protobasic", "protostream", "greedy", "exhaustive")


@dataclasses.dataclass
class RunConfig:
    algorithm: str
    m: int
    data: str
    out: str
    epsilon: float = 0.4
    bandwidth: str = "median"
    mu_mode: str = "exact"
    target: str | None = None
    labels: bool = False
    shuffle: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise InputError(f"unknown algorithm {self.algorithm!r}")
        if self.m < 1:
            raise InputError("m must be a positive integer")
        if not (0.0 < self.epsilon < 1.0):
            raise InputError("epsilon must lie in (0, 1)")
        if self.bandwidth != "median":
            try:
                value = float(self.bandwidth)
            except ValueError as exc:
                raise InputError("bandwidth must be a number or 'median'") from exc
            if not value > 0:
                raise InputError("bandwidth must be positive")
        if self.mu_mode != "exact" and not self.mu_mode.startswith("reservoir:"):
            raise InputError("mu-mode must be 'exact' or 'reservoir:R'")
        if self.mu_mode.startswith("reservoir:"):
            try:
                capacity = int(self.mu_mode.split(":", 1)[1])
            except ValueError as exc:
                raise InputError("reservoir capacity must be an integer") from exc
            if capacity < 1:
                raise InputError("reservoir capacity must be at least 1")

    @property
    def reservoir_capacity(self) -> int | None:
        if self.mu_mode.startswith("reservoir:"):
            return int(self.mu_mode.split(":", 1)[1])
        return None

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "m": self.m,
            "epsilon": self.epsilon,
            "bandwidth": self.bandwidth,
            "mu_mode": self.mu_mode,
            "data": self.data,
            "target": self.target,
            "labels": self.labels,
            "shuffle": self.shuffle,
            "seed": self.seed,
            "out": self.out,
        }


def _stream_order(points: list[DataPoint], config: RunConfig):
    """Row order is stream order; --shuffle permutes rows first."""
    n = len(points)
    if config.shuffle is None:
        order = np.arange(n)
    else:
        order = np.random.default_rng(config.shuffle).permutation(n)
    stream = [
        DataPoint(points[j].features, label=points[j].label, stream_index=t)
        for t, j in enumerate(order)
    ]
    return stream, order


def _resolve_bandwidth(config: RunConfig, stream) -> float:
    if config.bandwidth == "median":
        return median_heuristic(stream, rng=np.random.default_rng(config.seed))
    return float(config.bandwidth)


def _exact_mu(stream, target_points, cfg: KernelConfig) -> np.ndarray:
    if target_points is not None:
        est = target_mean(target_points, stream, cfg)
    else:
        est = mean_vector(stream, stream, cfg)
    return np.array([est.values[p.stream_index] for p in stream])


def _streaming_engine(config: RunConfig, stream, target_points, cfg: KernelConfig):
    """Single pass in stream order, returning (solution, counters)."""
    if config.algorithm == "protobasic":
        engine = ProtoBasic(config.m, cfg)
    else:
        engine = ProtoStream(config.m, config.epsilon, cfg, dim=stream[0].features.shape[0])

    capacity = config.reservoir_capacity
    if capacity is None:
        mu = _exact_mu(stream, target_points, cfg)
        for point, mu_j in zip(stream, mu):
            engine.offer(point.stream_index, point, float(mu_j))
    elif target_points is not None:
        est = streaming_mean([], cfg, capacity, seed=config.seed)
        for tp in target_points:
            update_streaming_mean(est, tp, cfg)
        for point in stream:
            engine.offer(point.stream_index, point, reservoir_estimate(est, point, cfg))
    else:
        # Self-referential stream: each arrival first joins the reservoir,
        # then gets its (frozen) estimate against it.
        est = streaming_mean([], cfg, capacity, seed=config.seed)
        for point in stream:
            update_streaming_mean(est, point, cfg)
            engine.offer(point.stream_index, point, reservoir_estimate(est, point, cfg))

    solution = engine.finalize()
    if isinstance(engine, ProtoBasic):
        counters = {
            "gradient_evaluations_total": engine.offers,
            "qp_solves_total": engine.qp_solves,
            "rejected_element_objective_evaluations": 0,
            "per_element_gradient_evaluations": [1] * engine.offers,
            "per_element_qp_solves": [0] * engine.offers,
            "finalize_qp_solves": engine.qp_solves,
            "peak_tracked_candidates": engine.peak_tracked,
        }
    else:
        counters = {
            "gradient_evaluations_total": engine.zero_gradient_evals
            + engine.residual_gradient_evals,
            "qp_solves_total": engine.qp_solves + engine.finalize_qp_solves,
            "rejected_element_objective_evaluations": engine.rejected_objective_evals,
            "per_element_gradient_evaluations": engine.per_element_gradient_evals,
            "per_element_qp_solves": engine.per_element_qp_solves,
            "finalize_qp_solves": engine.finalize_qp_solves,
            "max_live_sets": max(engine.live_set_counts, default=0),
        }
    return solution, counters


def _batch_solution(config: RunConfig, stream, target_points, cfg: KernelConfig) -> Solution:
    from .kernel import kernel_matrix

    n = len(stream)
    if config.algorithm == "exhaustive" and (n > oracle.MAX_N or config.m > oracle.MAX_M):
        raise InputError(
            f"exhaustive requires n <= {oracle.MAX_N} and m <= {oracle.MAX_M}, got n={n}, m={config.m}"
        )
    capacity = config.reservoir_capacity
    if capacity is None:
        mu = _exact_mu(stream, target_points, cfg)
    else:
        est = streaming_mean([], cfg, capacity, seed=config.seed)
        for ref in target_points if target_points is not None else stream:
            update_streaming_mean(est, ref, cfg)
        mu = np.array([reservoir_estimate(est, p, cfg) for p in stream])
    K = kernel_matrix(stream, cfg)
    if config.algorithm == "greedy":
        return oracle.batch_greedy(mu, K, config.m)
    subset, objective = oracle.exhaustive_optimum(mu, K, config.m)
    sol = oracle.solve_support(mu, K, subset)
    return Solution(subset, sol.weights, objective)


def _evaluate(config: RunConfig, stream, target_points, solution: Solution):
    if not config.labels:
        return None
    selected = [stream[i] for i in solution.indices]
    if not selected:
        return evaluation.EvalReport()
    if any(p.label is None for p in stream):
        raise InputError("--labels given but the dataset has no label column")
    histogram, entropy = evaluation.label_distribution(selected)
    weighted = list(zip(selected, solution.weights))
    accuracy = evaluation.one_nn_accuracy(weighted, stream, top_m=config.m)
    match_rate = None
    if target_points is not None and all(p.label is not None for p in target_points):
        target_label = max(
            {p.label for p in target_points},
            key=lambda lbl: sum(1 for p in target_points if p.label == lbl),
        )
        match_rate = evaluation.target_match_rate(selected, target_label)
    return evaluation.EvalReport(
        accuracy=accuracy,
        label_histogram=histogram,
        label_entropy=entropy,
        target_match_rate=match_rate,
    )


def run(config: RunConfig) -> dict:
    """Execute one configured selection run and return the report dict."""
    started = time.perf_counter()
    points = load_points_csv(config.data)
    target_points = load_points_csv(config.target) if config.target else None
    stream, order = _stream_order(points, config)
    cfg = KernelConfig(_resolve_bandwidth(config, stream))

    if config.algorithm in ("protobasic", "protostream"):
        solution, counters = _streaming_engine(config, stream, target_points, cfg)
    else:
        solution = _batch_solution(config, stream, target_points, cfg)
        counters = {}

    report_eval = _evaluate(config, stream, target_points, solution)
    report = {
        "config": config.to_dict(),
        "n_points": len(stream),
        "dimension": int(stream[0].features.shape[0]),
        "bandwidth": cfg.bandwidth,
        "selected_rows": sorted(int(order[i]) for i in solution.indices),
        "selected_stream_indices": list(solution.indices),
        "weights": [float(w) for w in solution.weights],
        "objective": float(solution.objective),
        "counters": counters,
        "evaluation": report_eval.to_dict() if report_eval is not None else None,
        "wall_time_s": time.perf_counter() - started,
    }
    return report


def compare_reports(a: dict, b: dict) -> dict:
    """Objective comparison of two run reports (ratio of a to b)."""
    obj_a, obj_b = a["objective"], b["objective"]
    return {
        "objective_a": obj_a,
        "objective_b": obj_b,
        "ratio": obj_a / obj_b if obj_b else None,
    }


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _write_histogram_csv(path: str, histogram: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("label,count\n")
        for label in sorted(histogram, key=lambda x: int(x)):
            fh.write(f"{label},{histogram[label]}\n")


def cmd_run(args) -> int:
    config = RunConfig(
        algorithm=args.algo,
        m=args.m,
        data=args.data,
        out=args.out,
        epsilon=args.epsilon,
        bandwidth=args.bandwidth,
        mu_mode=args.mu_mode,
        target=args.target,
        labels=args.labels,
        shuffle=args.shuffle,
        seed=args.seed,
    )
    report = run(config)
    _write_json(config.out, report)
    if report["evaluation"] and report["evaluation"]["label_histogram"]:
        _write_histogram_csv(config.out + ".labels.csv", report["evaluation"]["label_histogram"])
    print(
        f"{config.algorithm}: selected {len(report['selected_rows'])} prototypes, "
        f"objective {report['objective']:.6g} -> {config.out}"
    )
    return 0


def cmd_verify(args) -> int:
    started = time.perf_counter()
    results = verification.run_all(seed=args.seed, trials=args.trials)
    passed = all(r.passed for r in results)
    payload = {
        "seed": args.seed,
        "trials": args.trials,
        "checks": [r.to_dict() for r in results],
        "passed": passed,
        "wall_time_s": time.perf_counter() - started,
    }
    if args.out:
        _write_json(args.out, payload)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(
            f"{status} {r.name}: trials={r.trials} violations={r.violations} "
            f"skipped={r.skipped} worst_margin={r.worst_margin:.3e}"
        )
    print("verification " + ("passed" if passed else "FAILED"))
    return 0 if passed else 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="protoselect",
        description="Streaming prototype selection with non-negative importance weights.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a selection algorithm over a CSV dataset")
    run_p.add_argument("--algo", required=True, choices=ALGORITHMS)
    run_p.add_argument("--m", type=int, required=True, help="maximum prototypes to select")
    run_p.add_argument("--epsilon", type=float, default=0.4, help="threshold ladder ratio")
    run_p.add_argument("--bandwidth", default="median", help="Gaussian width or 'median'")
    run_p.add_argument("--mu-mode", default="exact", help="'exact' or 'reservoir:R'")
    run_p.add_argument("--data", required=True, help="input CSV (row order is stream order)")
    run_p.add_argument("--target", default=None, help="optional target CSV for shifted runs")
    run_p.add_argument("--labels", action="store_true", help="compute label-based metrics")
    run_p.add_argument("--shuffle", type=int, default=None, help="permute rows with this seed")
    run_p.add_argument("--seed", type=int, default=0)
    run_p.add_argument("--out", required=True, help="output JSON report path")
    run_p.set_defaults(func=cmd_run)

    verify_p = sub.add_parser("verify", help="run the randomized verification suite")
    verify_p.add_argument("--seed", type=int, default=0)
    verify_p.add_argument("--trials", type=int, default=200)
    verify_p.add_argument("--out", default=None, help="optional JSON report path")
    verify_p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 1
    except (ConvergenceError, NumericalError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
