"""Downstream quality metrics for a selected prototype set.

Learned weights and the feature-space distance are not on the same scale, so
weights are used only to rank prototypes for top-m selection, never as
distance multipliers.
"""
from __future__ import annotations

import dataclasses
import math
from collections import Counter

import numpy as np

from .datatypes import DataPoint, stack_features
from .errors import InputError


@dataclasses.dataclass
class EvalReport:
    accuracy: float | None = None
    label_histogram: dict[int, int] | None = None
    label_entropy: float | None = None
    target_match_rate: float | None = None
    cluster_histogram: dict[int, float] | None = None

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "label_histogram": (
                {str(k): v for k, v in sorted(self.label_histogram.items())}
                if self.label_histogram is not None
                else None
            ),
            "label_entropy": self.label_entropy,
            "target_match_rate": self.target_match_rate,
            "cluster_histogram": (
                {str(k): v for k, v in sorted(self.cluster_histogram.items())}
                if self.cluster_histogram is not None
                else None
            ),
        }


def _require_labels(points) -> None:
    if any(p.label is None for p in points):
        raise InputError("all points must carry labels for this metric")


def top_weighted(prototypes, top_m: int) -> list[DataPoint]:
    """Top-m prototypes by weight; ties keep the smaller stream index."""
    ranked = sorted(prototypes, key=lambda pw: (-pw[1], pw[0].stream_index))
    return [p for p, _ in ranked[:top_m]]


def one_nn_accuracy(prototypes, test, top_m: int) -> float:
    """Nearest-prototype classification accuracy with the top-m by weight."""
    if not prototypes:
        raise InputError("no prototypes to evaluate")
    if not test:
        raise InputError("empty test set")
    kept = top_weighted(prototypes, top_m)
    _require_labels(kept)
    _require_labels(test)
    P = stack_features(kept)
    labels = np.array([p.label for p in kept])
    T = stack_features(test)
    d2 = np.sum((T[:, None, :] - P[None, :, :]) ** 2, axis=2)
    predicted = labels[np.argmin(d2, axis=1)]
    actual = np.array([p.label for p in test])
    return float(np.mean(predicted == actual))


def label_distribution(prototypes) -> tuple[dict[int, int], float]:
    """Label counts of the selection and the Shannon entropy (nats) of the
    normalized histogram."""
    _require_labels(prototypes)
    counts = Counter(p.label for p in prototypes)
    total = sum(counts.values())
    entropy = -sum((c / total) * math.log(c / total) for c in counts.values() if c > 0)
    return dict(counts), float(entropy)


def target_match_rate(prototypes, target_label: int) -> float:
    """Fraction of the selection whose label equals the target class."""
    if not prototypes:
        raise InputError("no prototypes to evaluate")
    _require_labels(prototypes)
    return float(sum(1 for p in prototypes if p.label == target_label) / len(prototypes))


def _kmeans_pp_init(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    centroids = [X[rng.integers(len(X))]]
    for _ in range(k - 1):
        d2 = np.min(
            np.sum((X[:, None, :] - np.array(centroids)[None, :, :]) ** 2, axis=2), axis=1
        )
        total = d2.sum()
        if total <= 0:
            centroids.append(X[rng.integers(len(X))])
            continue
        centroids.append(X[rng.choice(len(X), p=d2 / total)])
    return np.array(centroids)


def lloyd_kmeans(X: np.ndarray, k: int, seed: int, max_iter: int = 100) -> np.ndarray:
    """Plain Lloyd iterations from a k-means++ start; returns the centroids."""
    rng = np.random.default_rng(seed)
    centroids = _kmeans_pp_init(X, k, rng)
    for _ in range(max_iter):
        assign = np.argmin(
            np.sum((X[:, None, :] - centroids[None, :, :]) ** 2, axis=2), axis=1
        )
        updated = centroids.copy()
        for c in range(k):
            members = X[assign == c]
            if len(members):
                updated[c] = members.mean(axis=0)
        if np.allclose(updated, centroids, rtol=0.0, atol=1e-12):
            break
        centroids = updated
    return centroids


def cluster_coverage(prototypes, base, k: int, seed: int = 0) -> dict[int, float]:
    """Fraction of prototypes landing in each k-means cluster of the base set.

    The clustering seed is fixed and reported by the caller so runs are
    reproducible.
    """
    if k < 1:
        raise InputError("k must be at least 1")
    if k > len(base):
        raise InputError(f"k={k} exceeds the base set size {len(base)}")
    if not prototypes:
        raise InputError("no prototypes to evaluate")
    centroids = lloyd_kmeans(stack_features(base), k, seed)
    P = stack_features(prototypes)
    assign = np.argmin(np.sum((P[:, None, :] - centroids[None, :, :]) ** 2, axis=2), axis=1)
    return {c: float(np.mean(assign == c)) for c in range(k)}
