"""Synthetic labeled embeddings with controlled label noise.

Class centers sit on a regular simplex (equal pairwise separation; the
default, which keeps filtering thresholds geometry-independent), at seeded
random positions, or on a collinear chain (the stress layout: contaminant
pulls on edge classes are grossly one-sided, so noise visibly damages a
non-robust downstream fit). Samples are isotropic Gaussians. Label noise
redraws a fixed fraction of labels uniformly over all k classes, so about
1/k of the redrawn labels land back on the true class; an always-wrong mode
redraws over the other k-1 classes instead. Optional far-field rows with
label -1 are appended beyond every class's training distance range.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict

import numpy as np

from .dataset import EmbeddingDataset, SampleIndexSet
from .errors import DataError, PipelineError
from .geometry import distances_to_point, median_centroid


@dataclass(frozen=True)
class SynthConfig:
    k: int = 10
    per_class: int = 500
    dim: int = 16
    class_sep: float = 6.0  # pairwise center distance, in units of within_std
    within_std: float = 1.0
    noise_frac: float = 0.0
    ood_count: int = 0
    seed: int = 1
    center_mode: str = "simplex"  # "simplex" | "random" | "chain"
    noise_mode: str = "uniform"  # "uniform" | "always_wrong"

    def __post_init__(self) -> None:
        if self.k < 1 or self.per_class < 1 or self.dim < 1:
            raise DataError("k, per_class and dim must all be >= 1")
        if not (0.0 <= self.noise_frac < 1.0):
            raise DataError(f"noise_frac must be in [0, 1), got {self.noise_frac}")
        if self.class_sep <= 0 or self.within_std <= 0:
            raise DataError("class_sep and within_std must be > 0")
        if self.ood_count < 0:
            raise DataError("ood_count must be >= 0")
        if self.center_mode not in ("simplex", "random", "chain"):
            raise DataError(f"unknown center_mode {self.center_mode!r}")
        if self.noise_mode not in ("uniform", "always_wrong"):
            raise DataError(f"unknown noise_mode {self.noise_mode!r}")


@dataclass(frozen=True)
class GroundTruth:
    true_labels: np.ndarray
    noise_mask: np.ndarray
    ood_indices: SampleIndexSet

    def to_json_dict(self) -> dict:
        return {
            "true_labels": self.true_labels.tolist(),
            "noise_mask": self.noise_mask.astype(int).tolist(),
            "ood_indices": self.ood_indices.indices.tolist(),
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "GroundTruth":
        return cls(
            true_labels=np.asarray(obj["true_labels"], dtype=np.int32),
            noise_mask=np.asarray(obj["noise_mask"], dtype=bool),
            ood_indices=SampleIndexSet.from_any(obj["ood_indices"]),
        )


def simplex_centers(k: int, dim: int, sep: float) -> np.ndarray:
    """k centers with all pairwise distances equal to sep, centered at 0."""
    if dim < k - 1:
        raise PipelineError(
            f"dim={dim} too small for a {k}-vertex simplex (needs >= {k - 1})"
        )
    raw = np.eye(k) * (sep / np.sqrt(2.0))
    raw -= raw.mean(axis=0, keepdims=True)
    if k == 1:
        return np.zeros((1, dim))
    # Rotate the rank-(k-1) point set onto its principal axes, then pad.
    _, s, vt = np.linalg.svd(raw, full_matrices=False)
    coords = raw @ vt.T[:, : k - 1]
    centers = np.zeros((k, dim))
    centers[:, : k - 1] = coords
    return centers


def chain_centers(k: int, dim: int, sep: float) -> np.ndarray:
    """k collinear centers along the first axis, adjacent ones sep apart."""
    centers = np.zeros((k, dim))
    centers[:, 0] = (np.arange(k) - (k - 1) / 2.0) * sep
    return centers


def random_centers(k: int, dim: int, sep: float, rng: np.random.Generator) -> np.ndarray:
    """Seeded random centers rescaled so the closest pair is exactly sep apart."""
    for _ in range(64):
        c = rng.normal(0.0, 1.0, size=(k, dim))
        c -= c.mean(axis=0, keepdims=True)
        if k == 1:
            return c * 0.0
        d2 = ((c[:, None, :] - c[None, :, :]) ** 2).sum(-1)
        np.fill_diagonal(d2, np.inf)
        dmin = float(np.sqrt(d2.min()))
        if dmin > 0:
            return c * (sep / dmin)
    raise PipelineError("failed to draw distinct random centers")


def generate(cfg: SynthConfig) -> tuple[EmbeddingDataset, GroundTruth]:
    """Build a labeled dataset plus the ground truth the scorer needs."""
    rng = np.random.default_rng(cfg.seed)
    sep = cfg.class_sep * cfg.within_std
    if cfg.center_mode == "simplex":
        centers = simplex_centers(cfg.k, cfg.dim, sep)
    elif cfg.center_mode == "chain":
        centers = chain_centers(cfg.k, cfg.dim, sep)
    else:
        centers = random_centers(cfg.k, cfg.dim, sep, rng)

    n_labeled = cfg.k * cfg.per_class
    feats = np.empty((n_labeled + cfg.ood_count, cfg.dim), dtype=np.float64)
    true_labels = np.repeat(np.arange(cfg.k, dtype=np.int32), cfg.per_class)
    for j in range(cfg.k):
        block = slice(j * cfg.per_class, (j + 1) * cfg.per_class)
        feats[block] = centers[j] + rng.normal(
            0.0, cfg.within_std, size=(cfg.per_class, cfg.dim)
        )

    labels = np.concatenate(
        [true_labels, np.full(cfg.ood_count, -1, dtype=np.int32)]
    )
    truth_labels = labels.copy()
    n_redraw = int(round(cfg.noise_frac * n_labeled))
    if n_redraw:
        chosen = rng.choice(n_labeled, size=n_redraw, replace=False)
        if cfg.noise_mode == "uniform":
            labels[chosen] = rng.integers(0, cfg.k, size=n_redraw, dtype=np.int32)
        else:
            shift = rng.integers(1, cfg.k, size=n_redraw, dtype=np.int32)
            labels[chosen] = (true_labels[chosen] + shift) % cfg.k

    if cfg.ood_count:
        # Radius beyond both the stated 3*sep floor and the chi-tail of any
        # class, so far-field rows always exceed every calibrated tau.
        max_norm = float(np.linalg.norm(centers, axis=1).max()) if cfg.k else 0.0
        offset = max(
            3.0 * sep, (np.sqrt(cfg.dim) + 6.0) * cfg.within_std
        )
        dirs = rng.normal(0.0, 1.0, size=(cfg.ood_count, cfg.dim))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        feats[n_labeled:] = dirs * (max_norm + offset)

    ds = EmbeddingDataset(
        features=feats.astype(np.float32), labels=labels, k=cfg.k
    )
    truth = GroundTruth(
        true_labels=truth_labels,
        noise_mask=labels != truth_labels,
        ood_indices=SampleIndexSet(
            np.arange(n_labeled, n_labeled + cfg.ood_count, dtype=np.int64)
        ),
    )
    return ds, truth


def save_ground_truth(truth: GroundTruth, path, cfg: SynthConfig | None = None) -> None:
    obj = truth.to_json_dict()
    if cfg is not None:
        obj["config"] = asdict(cfg)
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def load_ground_truth(path) -> GroundTruth:
    with open(path, "r", encoding="ascii") as fh:
        return GroundTruth.from_json_dict(json.load(fh))


def fit_label_centroids(
    ds: EmbeddingDataset, kept: SampleIndexSet, fit: str = "median"
) -> np.ndarray:
    """Per-class centroid over the kept rows, ignoring unlabeled rows.

    fit="median" matches the filter's own robust centroid; fit="mean" is the
    textbook nearest-centroid fit, deliberately sensitive to label noise.
    """
    if ds.labels is None:
        raise DataError("labeled dataset required")
    if fit not in ("median", "mean"):
        raise DataError(f"unknown fit {fit!r}")
    cents = np.empty((ds.k, ds.dim), dtype=np.float64)
    kept_idx = kept.indices
    for j in range(ds.k):
        rows = kept_idx[ds.labels[kept_idx] == j]
        if rows.size == 0:
            raise PipelineError(f"class {j} has no kept samples")
        block = ds.features[rows].astype(np.float64)
        cents[j] = median_centroid(block) if fit == "median" else block.mean(axis=0)
    return cents


def nearest_centroid_accuracy(
    train: EmbeddingDataset,
    kept: SampleIndexSet,
    test: EmbeddingDataset,
    fit: str = "median",
) -> float:
    """Accuracy of a nearest-centroid classifier fit on the kept rows.

    Stands in for retraining the downstream model at desk scale.
    """
    if test.labels is None:
        raise DataError("test set must be labeled")
    cents = fit_label_centroids(train, kept, fit=fit)
    d = np.stack(
        [distances_to_point(test.features, cents[j]) for j in range(train.k)],
        axis=1,
    )
    pred = np.argmin(d, axis=1)
    labeled = test.labels >= 0
    if not np.any(labeled):
        raise DataError("test set has no labeled rows")
    return float(np.mean(pred[labeled] == test.labels[labeled]))


def split_train_test(
    ds: EmbeddingDataset, truth: GroundTruth, train_per_class: int
) -> tuple[EmbeddingDataset, EmbeddingDataset, np.ndarray]:
    """Split one generated dataset into a noisy train set and a clean test set.

    The first train_per_class rows of each true class keep their (possibly
    corrupted) labels; the remainder become the test set with true labels, so
    both splits share the same class centers. Returns (train, test,
    train_noise_mask). Far-field rows are dropped.
    """
    k = ds.k
    train_rows, test_rows = [], []
    for j in range(k):
        rows = np.flatnonzero(truth.true_labels == j)
        if rows.size <= train_per_class:
            raise DataError(
                f"class {j} has {rows.size} rows; need more than {train_per_class}"
            )
        train_rows.append(rows[:train_per_class])
        test_rows.append(rows[train_per_class:])
    tr = np.sort(np.concatenate(train_rows))
    te = np.sort(np.concatenate(test_rows))
    train = EmbeddingDataset(features=ds.features[tr], labels=ds.labels[tr], k=k)
    test = EmbeddingDataset(
        features=ds.features[te], labels=truth.true_labels[te], k=k
    )
    return train, test, truth.noise_mask[tr]
