"""Label corruption matching the synthetic benchmark's noise model:
a fraction of labels is redrawn uniformly over all k classes, so roughly
1/k of the redrawn labels land back on the true class."""

from __future__ import annotations

import numpy as np


def inject_label_noise(labels: np.ndarray, frac: float, seed: int,
                       k: int | None = None):
    """Returns (corrupted labels, mask of rows whose label changed)."""
    if not (0.0 <= frac < 1.0):
        raise ValueError(f"frac must be in [0, 1), got {frac}")
    labels = np.asarray(labels, dtype=np.int32)
    if k is None:
        k = int(labels.max()) + 1
    rng = np.random.default_rng(seed)
    out = labels.copy()
    n_redraw = int(round(frac * labels.size))
    if n_redraw:
        chosen = rng.choice(labels.size, size=n_redraw, replace=False)
        out[chosen] = rng.integers(0, k, size=n_redraw, dtype=np.int32)
    return out, out != labels
