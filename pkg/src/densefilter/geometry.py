"""Centroids, centroid distances, and per-class max-distance thresholds.

Centroids are coordinate-wise medians (mean of the two middle order
statistics for even counts). Distances are Euclidean, accumulated in float64
even though storage is float32; float32 sums over wide feature vectors lose
precision against the 1e-5 oracle tolerance used in tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .dataset import EmbeddingDataset, SampleIndexSet
from .errors import DataError, PipelineError


@dataclass(frozen=True)
class CentroidSet:
    """One centroid per class plus the member count it was computed from."""

    centroids: np.ndarray
    source_counts: np.ndarray

    def __post_init__(self) -> None:
        c = np.asarray(self.centroids, dtype=np.float64)
        m = np.asarray(self.source_counts, dtype=np.int64)
        if c.ndim != 2 or c.shape[0] < 1:
            raise DataError("centroids must be a k x dim matrix, k >= 1")
        if not np.all(np.isfinite(c)):
            raise DataError("centroids contain non-finite values")
        if m.shape != (c.shape[0],) or np.any(m < 1):
            raise DataError("source_counts must be >= 1 per class")
        object.__setattr__(self, "centroids", c)
        object.__setattr__(self, "source_counts", m)

    @property
    def k(self) -> int:
        return int(self.centroids.shape[0])

    @property
    def dim(self) -> int:
        return int(self.centroids.shape[1])


@dataclass(frozen=True)
class DistanceTable:
    """values[i, j] = Euclidean distance from sample i to centroid j."""

    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise DataError("distance table must be 2-D")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise DataError("distances must be finite and non-negative")
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class ThresholdSet:
    """Per-class max-distance thresholds tau plus the ambiguity tolerance eta."""

    tau: np.ndarray
    eta: float

    def __post_init__(self) -> None:
        t = np.asarray(self.tau, dtype=np.float64)
        if t.ndim != 1 or np.any(t < 0) or not np.all(np.isfinite(t)):
            raise DataError("tau must be a vector of non-negative finite values")
        if self.eta < 0:
            raise DataError("eta must be >= 0")
        object.__setattr__(self, "tau", t)


def median_centroid(vectors: np.ndarray) -> np.ndarray:
    """Coordinate-wise median of an m x dim matrix."""
    v = np.asarray(vectors, dtype=np.float64)
    if v.ndim != 2 or v.shape[0] < 1:
        raise DataError("median_centroid needs at least one vector")
    return np.median(v, axis=0)


def l2_normalize_rows(features: np.ndarray) -> np.ndarray:
    """Scale each row to unit L2 norm; zero rows are left untouched."""
    f = np.asarray(features, dtype=np.float64)
    norms = np.linalg.norm(f, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return f / norms


def class_centroids(
    ds: EmbeddingDataset, core_sets: dict[int, SampleIndexSet]
) -> CentroidSet:
    """Median centroid per class over its (non-empty) core-set rows."""
    if ds.labels is None:
        raise DataError("class_centroids requires a labeled dataset")
    cents = np.empty((ds.k, ds.dim), dtype=np.float64)
    counts = np.empty(ds.k, dtype=np.int64)
    for j in range(ds.k):
        core = core_sets[j]
        if len(core) == 0:
            raise PipelineError(f"empty core set for class {j}")
        cents[j] = median_centroid(ds.features[core.indices])
        counts[j] = len(core)
    return CentroidSet(centroids=cents, source_counts=counts)


def distance_table(ds: EmbeddingDataset, cents: CentroidSet) -> DistanceTable:
    if ds.dim != cents.dim:
        raise DataError(f"dimension mismatch: dataset {ds.dim}, centroids {cents.dim}")
    vals = cdist(ds.features.astype(np.float64), cents.centroids)
    return DistanceTable(values=vals)


def distances_to_point(rows: np.ndarray, point: np.ndarray) -> np.ndarray:
    """Euclidean distance from each row to a single point, in float64."""
    diff = np.asarray(rows, dtype=np.float64) - np.asarray(point, dtype=np.float64)
    return np.sqrt(np.einsum("ij,ij->i", diff, diff))


def max_distance_thresholds(
    dists: DistanceTable, labels: np.ndarray, kept: SampleIndexSet
) -> np.ndarray:
    """tau[j] = max own-class centroid distance over kept samples of class j."""
    labels = np.asarray(labels)
    k = dists.values.shape[1]
    kept_idx = kept.indices
    tau = np.empty(k, dtype=np.float64)
    for j in range(k):
        rows = kept_idx[labels[kept_idx] == j]
        if rows.size == 0:
            raise PipelineError(f"class {j} has no kept samples")
        tau[j] = dists.values[rows, j].max()
    return tau
