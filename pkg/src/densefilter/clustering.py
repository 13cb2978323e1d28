"""Per-class DBSCAN and core-cluster selection.

Classic DBSCAN semantics with the Euclidean metric: a point is core iff its
eps-neighborhood (including the point itself) holds at least min_pts samples;
clusters are maximal density-connected sets; border points join the first
core cluster that reaches them in ascending scan order, which makes runs
bit-reproducible. Neighbor search is exact pairwise distance, O(n^2) per
class; fine at desk scale.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .dataset import SampleIndexSet
from .errors import DataError

NOISE = -1

_CHUNK_ROWS = 1024


@dataclass(frozen=True)
class DbscanParams:
    """eps: neighborhood radius in feature units; min_pts: density floor."""

    eps: float
    min_pts: int

    def __post_init__(self) -> None:
        if not (self.eps > 0):
            raise DataError(f"eps must be > 0, got {self.eps}")
        if self.min_pts < 1:
            raise DataError(f"min_pts must be >= 1, got {self.min_pts}")


@dataclass(frozen=True)
class ClusterAssignment:
    """cluster_of[i] in {-1 (noise)} | {0..p-1}; sizes indexed by cluster id."""

    cluster_of: np.ndarray
    cluster_sizes: list[int]
    core_mask: np.ndarray

    @property
    def n_clusters(self) -> int:
        return len(self.cluster_sizes)

    @property
    def noise_count(self) -> int:
        return int(np.count_nonzero(self.cluster_of == NOISE))

    def members(self, cluster_id: int) -> np.ndarray:
        return np.flatnonzero(self.cluster_of == cluster_id)


def _neighbor_lists(points: np.ndarray, eps: float) -> list[np.ndarray]:
    """Indices within eps of each row (self included), by chunked cdist."""
    pts = np.asarray(points, dtype=np.float64)
    n = pts.shape[0]
    out: list[np.ndarray] = []
    for start in range(0, n, _CHUNK_ROWS):
        block = cdist(pts[start : start + _CHUNK_ROWS], pts)
        for r in range(block.shape[0]):
            out.append(np.flatnonzero(block[r] <= eps))
    return out


def dbscan(points: np.ndarray, params: DbscanParams) -> ClusterAssignment:
    """Cluster rows of `points`; all-noise output is a valid result."""
    pts = np.asarray(points)
    if pts.ndim != 2 or pts.shape[0] < 1:
        raise DataError("points must be a non-empty 2-D matrix")
    if not np.all(np.isfinite(pts)):
        raise DataError("points contain non-finite values")
    n = pts.shape[0]
    neighbors = _neighbor_lists(pts, params.eps)
    core = np.array([nb.size >= params.min_pts for nb in neighbors], dtype=bool)

    labels = np.full(n, NOISE, dtype=np.int64)
    visited = np.zeros(n, dtype=bool)
    sizes: list[int] = []
    for seed in range(n):
        if visited[seed] or not core[seed]:
            continue
        cid = len(sizes)
        labels[seed] = cid
        visited[seed] = True
        count = 1
        queue = deque(neighbors[seed].tolist())
        while queue:
            q = queue.popleft()
            if labels[q] == NOISE:
                labels[q] = cid
                count += 1
            if visited[q]:
                continue
            visited[q] = True
            if core[q]:
                queue.extend(neighbors[q].tolist())
        sizes.append(count)
    return ClusterAssignment(cluster_of=labels, cluster_sizes=sizes, core_mask=core)


def core_cluster(assign: ClusterAssignment) -> SampleIndexSet:
    """Members of the largest cluster; ties go to the lower cluster id.

    Returns the empty set when everything is noise; callers apply their
    fallback.
    """
    if not assign.cluster_sizes:
        return SampleIndexSet.empty()
    best = int(np.argmax(assign.cluster_sizes))
    return SampleIndexSet(assign.members(best).astype(np.int64))
