"""Independent reference implementations used as test oracles.

Each oracle is written from the operation's definition, not from the
production code path: DBSCAN as a full-matrix BFS, Otsu as a scan over raw
sample splits at every interior edge, distances as explicit loops, medians
via sorting.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.spatial.distance import cdist


def reference_dbscan(points: np.ndarray, eps: float, min_pts: int):
    """Textbook DBSCAN over a full O(n^2) distance matrix.

    Returns (labels, core) with labels[i] = -1 for noise, cluster ids
    assigned in ascending-seed order, border points claimed by the first
    cluster that reaches them.
    """
    pts = np.asarray(points, dtype=np.float64)
    n = pts.shape[0]
    dmat = cdist(pts, pts)
    neigh = [np.flatnonzero(dmat[i] <= eps) for i in range(n)]
    core = np.array([nb.size >= min_pts for nb in neigh])
    labels = np.full(n, -1, dtype=int)
    cid = 0
    for i in range(n):
        if labels[i] != -1 or not core[i]:
            continue
        stack = [i]
        labels[i] = cid
        while stack:
            p = stack.pop()
            if not core[p]:
                continue
            for q in neigh[p]:
                if labels[q] == -1:
                    labels[q] = cid
                    stack.append(q)
        cid += 1
    return labels, core


def canonical_clusters(labels: np.ndarray) -> tuple:
    """Order-free view of a clustering: sorted tuple of member tuples."""
    labels = np.asarray(labels)
    out = []
    for c in np.unique(labels[labels >= 0]):
        out.append(tuple(np.flatnonzero(labels == c).tolist()))
    return tuple(sorted(out))


def otsu_scan(samples: np.ndarray, bins: int):
    """Exhaustive inter-class-variance scan over every interior bin edge.

    Sides are split directly on the raw values (below = x < edge), means are
    exact sample means. Returns (threshold, sigma_b, sigmas_per_edge).
    """
    d = np.asarray(samples, dtype=np.float64).ravel()
    lo, hi = d.min(), d.max()
    edges = np.linspace(lo, hi, bins + 1)
    best_edge, best_sigma = None, -1.0
    sigmas = []
    for i in range(1, bins):
        below = d < edges[i]
        n0 = int(below.sum())
        n1 = d.size - n0
        if n0 == 0 or n1 == 0:
            sigmas.append(0.0)
            continue
        w0 = n0 / d.size
        w1 = n1 / d.size
        mu0 = d[below].mean()
        mu1 = d[~below].mean()
        sigma = w0 * w1 * (mu1 - mu0) ** 2
        sigmas.append(sigma)
        if sigma > best_sigma:
            best_sigma = sigma
            best_edge = edges[i]
    return best_edge, best_sigma, np.asarray(sigmas)


def otsu_scan_sorted(samples: np.ndarray, bins: int):
    """Same exhaustive edge scan as otsu_scan, via sorted prefix sums.

    Still split-on-raw-values: for edge e the below side is {x : x < e},
    located with searchsorted on the sorted sample.
    """
    d = np.sort(np.asarray(samples, dtype=np.float64).ravel())
    n = d.size
    prefix = np.concatenate([[0.0], np.cumsum(d)])
    edges = np.linspace(d[0], d[-1], bins + 1)
    inner = edges[1:-1]
    n0 = np.searchsorted(d, inner, side="left").astype(np.float64)
    n1 = n - n0
    valid = (n0 > 0) & (n1 > 0)
    s0 = prefix[n0.astype(int)]
    mu0 = np.divide(s0, n0, out=np.zeros_like(s0), where=valid)
    mu1 = np.divide(prefix[-1] - s0, n1, out=np.zeros_like(s0), where=valid)
    sigma = np.where(valid, (n0 / n) * (n1 / n) * (mu1 - mu0) ** 2, 0.0)
    best = int(np.argmax(sigma))
    return float(inner[best]), float(sigma[best])


def naive_distance_table(features: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    feats = np.asarray(features, dtype=np.float64)
    cents = np.asarray(centroids, dtype=np.float64)
    out = np.empty((feats.shape[0], cents.shape[0]))
    for i in range(feats.shape[0]):
        for j in range(cents.shape[0]):
            out[i, j] = math.sqrt(float(((feats[i] - cents[j]) ** 2).sum()))
    return out


def sort_median(vectors: np.ndarray) -> np.ndarray:
    """Per-coordinate median via explicit sorting (mean of middles if even)."""
    v = np.asarray(vectors, dtype=np.float64)
    m = v.shape[0]
    out = np.empty(v.shape[1])
    for d in range(v.shape[1]):
        col = np.sort(v[:, d])
        if m % 2:
            out[d] = col[m // 2]
        else:
            out[d] = 0.5 * (col[m // 2 - 1] + col[m // 2])
    return out


def eta_scan(gaps: np.ndarray, n: int, ood_count: int, target: float):
    """Exhaustive candidate scan for the smallest eta with coverage <= target.

    gaps are the second-minus-first distances of the non-OOD rows; coverage
    at eta counts non-OOD rows with gap >= eta.
    """
    cov0 = (n - ood_count) / n
    if cov0 <= target:
        return 0.0, cov0
    for g in np.unique(np.asarray(gaps, dtype=np.float64)):
        cov = float(np.count_nonzero(gaps > g)) / n
        if cov <= target:
            return float(np.nextafter(g, np.inf)), cov
    raise AssertionError("coverage never reached the target")
