"""Core data records and the CSV dataset reader.

A dataset file is UTF-8 CSV with a header row: d numeric feature columns,
optionally followed by one integer column that must be named ``label``.
Missing values are not allowed.
"""
from __future__ import annotations

import csv
import dataclasses

import numpy as np

from .errors import InputError


@dataclasses.dataclass(eq=False)
class DataPoint:
    """One streamed element: a dense feature vector with an optional class id."""

    features: np.ndarray
    label: int | None = None
    stream_index: int = 0

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float)
        if self.features.ndim != 1:
            raise InputError("features must be a one-dimensional vector")
        if not np.all(np.isfinite(self.features)):
            raise InputError("features must be finite")


@dataclasses.dataclass
class Solution:
    """A selected index set with its non-negative weights and objective value."""

    indices: tuple[int, ...]
    weights: np.ndarray
    objective: float

    @classmethod
    def empty(cls) -> "Solution":
        return cls((), np.zeros(0), 0.0)

    def to_dict(self) -> dict:
        return {
            "indices": list(self.indices),
            "weights": [float(w) for w in self.weights],
            "objective": float(self.objective),
        }


def stack_features(points) -> np.ndarray:
    """Stack the feature vectors of a point sequence into an (n, d) matrix."""
    if not points:
        return np.zeros((0, 0))
    return np.vstack([p.features for p in points])


def load_points_csv(path) -> list[DataPoint]:
    """Read a dataset file, assigning stream indices in row order."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise InputError(f"{path}: missing header row")
        has_label = header[-1].strip().lower() == "label"
        d = len(header) - (1 if has_label else 0)
        if d < 1:
            raise InputError(f"{path}: no feature columns in header")

        points: list[DataPoint] = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise InputError(
                    f"{path}:{lineno}: expected {len(header)} columns, got {len(row)}"
                )
            try:
                feats = np.array([float(cell) for cell in row[:d]])
            except ValueError as exc:
                raise InputError(f"{path}:{lineno}: non-numeric feature value ({exc})") from exc
            if not np.all(np.isfinite(feats)):
                raise InputError(f"{path}:{lineno}: non-finite feature value")
            label = None
            if has_label:
                try:
                    label = int(row[-1].strip())
                except ValueError as exc:
                    raise InputError(f"{path}:{lineno}: label must be an integer") from exc
            points.append(DataPoint(feats, label=label, stream_index=len(points)))

    if not points:
        raise InputError(f"{path}: no data rows")
    return points
