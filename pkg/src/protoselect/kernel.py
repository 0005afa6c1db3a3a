"""Gaussian kernel primitives and mean-similarity estimation.

Candidates are scored by their mean kernel similarity to a reference sample:
the stream itself for plain synopsis runs, or a separate target sample when
matching a shifted distribution. The exact two-pass estimate is used for
verification; a bounded uniform reservoir gives a one-pass approximation.
"""
from __future__ import annotations

import dataclasses
import math
import warnings

import numpy as np

from .datatypes import DataPoint, stack_features
from .errors import InputError

EXACT_TWO_PASS = "exact_two_pass"
RESERVOIR = "reservoir"


@dataclasses.dataclass
class KernelConfig:
    """Gaussian kernel k(a, b) = exp(-||a - b||^2 / (2 * bandwidth^2))."""

    bandwidth: float
    mode: str = "gaussian"

    def __post_init__(self):
        if self.mode != "gaussian":
            raise InputError(f"unsupported kernel mode {self.mode!r}")
        if not (math.isfinite(self.bandwidth) and self.bandwidth > 0):
            raise InputError(f"bandwidth must be positive and finite, got {self.bandwidth}")


def kernel_eval(a: DataPoint, b: DataPoint, cfg: KernelConfig) -> float:
    """Kernel value between two points; symmetric, in (0, 1]."""
    if a.features.shape != b.features.shape:
        raise InputError(
            f"dimension mismatch: {a.features.shape[0]} vs {b.features.shape[0]}"
        )
    diff = a.features - b.features
    return float(np.exp(-(diff @ diff) / (2.0 * cfg.bandwidth**2)))


def kernel_row(x: np.ndarray, others: np.ndarray, cfg: KernelConfig) -> np.ndarray:
    """Kernel values of one feature vector against each row of a feature matrix."""
    if others.size == 0:
        return np.zeros(0)
    d2 = np.sum((others - x) ** 2, axis=1)
    return np.exp(-d2 / (2.0 * cfg.bandwidth**2))


def kernel_matrix(points, cfg: KernelConfig) -> np.ndarray:
    """Full kernel matrix of a point list; unit diagonal, exactly symmetric."""
    if not points:
        raise InputError("kernel_matrix needs at least one point")
    X = stack_features(points)
    d2 = np.sum((X[:, None, :] - X[None, :, :]) ** 2, axis=2)
    return np.exp(-d2 / (2.0 * cfg.bandwidth**2))


@dataclasses.dataclass
class MeanEstimate:
    """Per-candidate mean kernel similarity to the reference sample.

    In exact mode ``values[j]`` is the full-reference average for candidate j.
    In reservoir mode the average is taken over a bounded uniform sample of
    the reference stream and recomputed for every tracked candidate whenever
    the reservoir changes. Single writer: at most one caller may feed a given
    instance through ``update_streaming_mean``.
    """

    values: dict[int, float]
    reference_count: int
    mode: str
    capacity: int | None = None
    reservoir: list[DataPoint] | None = None
    tracked: list[DataPoint] = dataclasses.field(default_factory=list)
    rng: np.random.Generator | None = None


def _mean_similarity(x: np.ndarray, reference_matrix: np.ndarray, cfg: KernelConfig) -> float:
    # Same routine on the exact and reservoir paths so a full reservoir
    # reproduces the two-pass values bit for bit.
    return float(np.mean(kernel_row(x, reference_matrix, cfg)))


def mean_vector(reference, candidates, cfg: KernelConfig) -> MeanEstimate:
    """Exact mean similarity of every candidate to the full reference sample."""
    if not reference:
        raise InputError("reference sample is empty")
    R = stack_features(reference)
    values = {p.stream_index: _mean_similarity(p.features, R, cfg) for p in candidates}
    return MeanEstimate(values, len(reference), EXACT_TWO_PASS, tracked=list(candidates))


def target_mean(target, candidates, cfg: KernelConfig) -> MeanEstimate:
    """Mean similarity of every candidate to a target sample.

    Only the target's feature vectors are read; its labels (if any) are not.
    """
    if not target:
        raise InputError("target sample is empty")
    return mean_vector(target, candidates, cfg)


def streaming_mean(candidates, cfg: KernelConfig, capacity: int, seed: int = 0) -> MeanEstimate:
    """Empty reservoir-mode estimate tracking the given candidates."""
    if capacity < 1:
        raise InputError("reservoir capacity must be at least 1")
    return MeanEstimate(
        values={},
        reference_count=0,
        mode=RESERVOIR,
        capacity=capacity,
        reservoir=[],
        tracked=list(candidates),
        rng=np.random.default_rng(seed),
    )


def update_streaming_mean(est: MeanEstimate, incoming: DataPoint, cfg: KernelConfig) -> MeanEstimate:
    """Offer one reference point to the reservoir and refresh tracked estimates."""
    if est.mode != RESERVOIR:
        raise InputError("update_streaming_mean requires a reservoir-mode estimate")
    t = est.reference_count
    if len(est.reservoir) < est.capacity:
        est.reservoir.append(incoming)
    else:
        slot = int(est.rng.integers(0, t + 1))
        if slot < est.capacity:
            est.reservoir[slot] = incoming
    est.reference_count = t + 1
    if est.tracked:
        R = stack_features(est.reservoir)
        for p in est.tracked:
            est.values[p.stream_index] = _mean_similarity(p.features, R, cfg)
    return est


def reservoir_estimate(est: MeanEstimate, point: DataPoint, cfg: KernelConfig) -> float:
    """One-off similarity estimate for an untracked point against the reservoir."""
    if est.mode != RESERVOIR:
        raise InputError("reservoir_estimate requires a reservoir-mode estimate")
    if not est.reservoir:
        raise InputError("reservoir is empty")
    return _mean_similarity(point.features, stack_features(est.reservoir), cfg)


def median_heuristic(points, cap: int = 500, rng: np.random.Generator | None = None) -> float:
    """Median pairwise Euclidean distance of a sample, as a default bandwidth.

    Samples are capped at ``cap`` points (uniform subsample). Returns 1.0 with
    a warning when the sampled points are all identical.
    """
    if len(points) < 2:
        raise InputError("median heuristic needs at least two points")
    X = stack_features(points)
    if len(points) > cap:
        if rng is None:
            rng = np.random.default_rng(0)
        keep = np.sort(rng.choice(len(points), size=cap, replace=False))
        X = X[keep]
    iu = np.triu_indices(X.shape[0], k=1)
    d2 = np.sum((X[:, None, :] - X[None, :, :]) ** 2, axis=2)[iu]
    med = float(np.median(np.sqrt(d2)))
    if med <= 0.0:
        warnings.warn("all sampled points identical; falling back to bandwidth 1.0")
        return 1.0
    return med
