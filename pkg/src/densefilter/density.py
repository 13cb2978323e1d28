"""Gaussian KDE over a univariate distance sample, and peak counting.

The density estimate is pdf(x) = (1/(n*h)) * sum_i phi((x - d_i)/h) with phi
the standard normal density, evaluated on an evenly spaced grid spanning
[min - 3h, max + 3h] so at most ~0.3% of each kernel's mass leaks past the
grid ends. A peak is an interior grid index where the discrete gradient
changes sign + to -; plateaus count once at their leftmost index, and peaks
below min_rel_height * max(pdf) are discarded as floating-point ripple.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError

_SQRT_2PI = float(np.sqrt(2.0 * np.pi))
_CHUNK = 4096


@dataclass(frozen=True)
class KdeCurve:
    grid: np.ndarray
    pdf: np.ndarray
    bandwidth: float

    def __post_init__(self) -> None:
        g = np.asarray(self.grid, dtype=np.float64)
        p = np.asarray(self.pdf, dtype=np.float64)
        if g.ndim != 1 or g.shape != p.shape or g.size < 2:
            raise DataError("grid and pdf must be matching 1-D arrays")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "pdf", p)

    def mass(self) -> float:
        """Trapezoidal integral of the curve over its grid."""
        return float(np.trapezoid(self.pdf, self.grid))


@dataclass(frozen=True)
class ModalityVerdict:
    peak_count: int
    peak_locations: np.ndarray
    verdict: str  # "unimodal" | "multimodal"

    @property
    def unimodal(self) -> bool:
        return self.verdict == "unimodal"


def kde(
    samples: np.ndarray,
    bandwidth: float,
    grid_size: int = 512,
    grid_range: tuple[float, float] | None = None,
) -> KdeCurve:
    """Estimate the density of a 1-D sample on a fixed grid.

    grid_range overrides the default [min - 3h, max + 3h] span; used when
    several curves must share one grid.
    """
    d = np.asarray(samples, dtype=np.float64).ravel()
    if d.size == 0:
        raise DataError("kde requires a non-empty sample")
    if not np.all(np.isfinite(d)):
        raise DataError("kde sample contains non-finite values")
    if not (bandwidth > 0):
        raise DataError(f"bandwidth must be > 0, got {bandwidth}")
    if grid_size < 16:
        raise DataError(f"grid_size must be >= 16, got {grid_size}")
    h = float(bandwidth)
    if grid_range is None:
        lo, hi = float(d.min()) - 3.0 * h, float(d.max()) + 3.0 * h
    else:
        lo, hi = map(float, grid_range)
    grid = np.linspace(lo, hi, grid_size)
    pdf = np.zeros(grid_size, dtype=np.float64)
    for start in range(0, d.size, _CHUNK):
        z = (grid[:, None] - d[None, start : start + _CHUNK]) / h
        pdf += np.exp(-0.5 * z * z).sum(axis=1)
    pdf /= d.size * h * _SQRT_2PI
    return KdeCurve(grid=grid, pdf=pdf, bandwidth=h)


def count_peaks(curve: KdeCurve, min_rel_height: float = 0.01) -> ModalityVerdict:
    """Count sign changes + to - of the discrete gradient, plateau-aware."""
    if not (0.0 <= min_rel_height < 1.0):
        raise DataError(f"min_rel_height must be in [0, 1), got {min_rel_height}")
    pdf = curve.pdf
    diff = np.diff(pdf)
    nz = np.flatnonzero(diff != 0.0)
    floor = min_rel_height * float(pdf.max())
    peaks: list[int] = []
    prev_sign = 0.0
    last_rise = -1
    for pos in nz:
        s = 1.0 if diff[pos] > 0 else -1.0
        if prev_sign > 0 and s < 0:
            idx = last_rise + 1  # leftmost grid point of the maximum (plateau-safe)
            if pdf[idx] >= floor:
                peaks.append(int(idx))
        if s > 0:
            last_rise = int(pos)
        prev_sign = s
    locations = curve.grid[peaks] if peaks else np.empty(0, dtype=np.float64)
    count = max(len(peaks), 1) if peaks else 1
    if not peaks:
        # Degenerate monotone/flat curve: treat the global maximum as the
        # single mode so the verdict is always defined.
        locations = np.array([curve.grid[int(np.argmax(pdf))]])
    verdict = "unimodal" if count == 1 else "multimodal"
    return ModalityVerdict(peak_count=count, peak_locations=locations, verdict=verdict)


def export_curve_csv(curve: KdeCurve, path) -> None:
    """Two-column CSV (grid, pdf) for external plotting."""
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("grid,pdf\n")
        for g, p in zip(curve.grid, curve.pdf):
            fh.write(f"{float(g)!r},{float(p)!r}\n")
