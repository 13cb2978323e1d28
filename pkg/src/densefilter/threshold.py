"""Otsu's method repurposed for 1-D distance distributions.

The sample is binned into B equal-width bins over [min, max]; candidate
thresholds are the interior bin edges. For edge t the inter-class variance is
sigma_b(t) = w0*w1*(mu1 - mu0)^2 where w0/w1 are the probability masses below
and at-or-above t and mu0/mu1 the exact means of the raw values on each side
(each bin tracks count and value sum, so means are exact, not bin-center
approximations). The returned threshold is the argmax edge; ties break toward
the smaller threshold. The lower side is the clean side.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import SampleIndexSet
from .errors import DataError, PipelineError


@dataclass(frozen=True)
class OtsuResult:
    threshold: float
    sigma_b: float
    histogram: np.ndarray
    bin_edges: np.ndarray


def _bin_of(values: np.ndarray, edges: np.ndarray) -> np.ndarray:
    """Half-open bins [e_i, e_{i+1}); the last bin is closed."""
    idx = np.searchsorted(edges, values, side="right") - 1
    return np.clip(idx, 0, edges.size - 2)


def otsu_threshold(samples: np.ndarray, bins: int = 256) -> OtsuResult:
    d = np.asarray(samples, dtype=np.float64).ravel()
    if d.size == 0:
        raise DataError("otsu_threshold requires a non-empty sample")
    if not np.all(np.isfinite(d)):
        raise DataError("otsu_threshold sample contains non-finite values")
    if bins < 2:
        raise DataError(f"bins must be >= 2, got {bins}")
    lo, hi = float(d.min()), float(d.max())
    if lo == hi:
        raise PipelineError("all samples identical; no threshold exists")
    edges = np.linspace(lo, hi, bins + 1)
    which = _bin_of(d, edges)
    counts = np.bincount(which, minlength=bins).astype(np.float64)
    sums = np.bincount(which, weights=d, minlength=bins)

    n = d.size
    c0 = np.cumsum(counts)[:-1]  # mass strictly below each interior edge
    s0 = np.cumsum(sums)[:-1]
    c1 = n - c0
    s1 = d.sum() - s0
    valid = (c0 > 0) & (c1 > 0)
    sigma = np.zeros(bins - 1, dtype=np.float64)
    mu0 = np.divide(s0, c0, out=np.zeros_like(s0), where=valid)
    mu1 = np.divide(s1, c1, out=np.zeros_like(s1), where=valid)
    w0 = c0 / n
    w1 = c1 / n
    sigma[valid] = (w0 * w1 * (mu1 - mu0) ** 2)[valid]
    if not np.any(valid):
        raise PipelineError("degenerate histogram; no interior edge splits the sample")
    best = int(np.argmax(sigma))  # first max = smallest threshold on ties
    return OtsuResult(
        threshold=float(edges[best + 1]),
        sigma_b=float(sigma[best]),
        histogram=counts.astype(np.int64),
        bin_edges=edges,
    )


def split_by_threshold(
    samples: np.ndarray, threshold: float
) -> tuple[SampleIndexSet, SampleIndexSet]:
    """Partition sample positions into below (<= threshold) and above (>)."""
    d = np.asarray(samples, dtype=np.float64).ravel()
    below = np.flatnonzero(d <= threshold).astype(np.int64)
    above = np.flatnonzero(d > threshold).astype(np.int64)
    return SampleIndexSet(below), SampleIndexSet(above)
