"""Stage 1: remove label noise from a labeled embedding dataset.

Per class: DBSCAN over the class's rows selects the core cluster (fallback:
the whole class, with a warning, when everything is noise); the centroid is
the coordinate-wise median over the core cluster; distances of ALL class
members to that centroid feed a KDE modality test; a multimodal verdict
triggers an Otsu cut and removal of the above-threshold side, a unimodal
verdict removes nothing. Classes below the configured filter size are passed
through unfiltered with a warning. The per-class results reduce in class-id
order, so worker parallelism never changes the outcome.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np

from .clustering import DbscanParams, core_cluster, dbscan
from .dataset import EmbeddingDataset, SampleIndexSet
from .density import KdeCurve, ModalityVerdict, count_peaks, kde
from .errors import DataError, PipelineError
from .geometry import distances_to_point, l2_normalize_rows, median_centroid
from .threshold import OtsuResult, otsu_threshold

REPORT_SCHEMA = "densefilter-report/1"


@dataclass(frozen=True)
class DenoiseParams:
    eps: float
    min_pts: int
    kde_h: float = 0.3
    kde_h_mode: str = "absolute"  # "absolute" | "relative" (x sample std)
    kde_grid_size: int = 512
    peak_min_rel_height: float = 0.01
    otsu_bins: int = 256
    min_class_size: int = 2  # hard error below this
    min_filter_size: int | None = None  # default 2*min_pts; below -> pass through
    l2_normalize: bool = False
    threads: int = 1

    def __post_init__(self) -> None:
        DbscanParams(eps=self.eps, min_pts=self.min_pts)  # validates
        if self.kde_h_mode not in ("absolute", "relative"):
            raise DataError(f"unknown kde_h_mode {self.kde_h_mode!r}")
        if self.min_class_size < 2:
            raise DataError("min_class_size must be >= 2")
        if self.threads < 1:
            raise DataError("threads must be >= 1")

    @property
    def effective_filter_size(self) -> int:
        return self.min_filter_size if self.min_filter_size is not None else 2 * self.min_pts

    def dbscan_params(self) -> DbscanParams:
        return DbscanParams(eps=self.eps, min_pts=self.min_pts)


@dataclass
class ClassProfile:
    """Everything Stage 1 learned about one class."""

    class_id: int
    members: SampleIndexSet
    core_set: SampleIndexSet
    centroid: np.ndarray
    own_distances: np.ndarray  # aligned with members
    modality: ModalityVerdict
    kde_curve: KdeCurve
    otsu: OtsuResult | None
    removed: SampleIndexSet
    cluster_sizes: list[int]
    noise_count: int
    warnings: list[str] = field(default_factory=list)
    tau: float | None = None  # filled by abstain calibration

    @property
    def kept(self) -> SampleIndexSet:
        return self.members.difference(self.removed)


@dataclass
class DenoiseOutcome:
    kept: SampleIndexSet
    removed: SampleIndexSet
    profiles: list[ClassProfile]
    params: DenoiseParams
    n: int
    dim: int
    k: int


def _class_profile(
    ds_features: np.ndarray, members: SampleIndexSet, class_id: int, params: DenoiseParams
) -> ClassProfile:
    warnings: list[str] = []
    rows = ds_features[members.indices]
    m = len(members)

    filterable = m >= params.effective_filter_size
    if filterable:
        assign = dbscan(rows, params.dbscan_params())
        core_local = core_cluster(assign)
        cluster_sizes = assign.cluster_sizes
        noise_count = assign.noise_count
        if len(core_local) == 0:
            warnings.append("dbscan marked every sample as noise; using whole class")
            core_local = SampleIndexSet(np.arange(m, dtype=np.int64))
    else:
        warnings.append(
            f"class size {m} below filter minimum {params.effective_filter_size}; "
            "passed through unfiltered"
        )
        core_local = SampleIndexSet(np.arange(m, dtype=np.int64))
        cluster_sizes = []
        noise_count = 0

    centroid = median_centroid(rows[core_local.indices])
    own = distances_to_point(rows, centroid)

    h = params.kde_h
    if params.kde_h_mode == "relative":
        spread = float(own.std())
        h = params.kde_h * spread if spread > 0 else params.kde_h
    curve = kde(own, bandwidth=h, grid_size=params.kde_grid_size)
    verdict = count_peaks(curve, min_rel_height=params.peak_min_rel_height)

    otsu: OtsuResult | None = None
    removed_local = SampleIndexSet.empty()
    if not verdict.unimodal:
        if verdict.peak_count > 2:
            warnings.append(
                f"{verdict.peak_count} peaks detected; applying the bimodal cut"
            )
        otsu = otsu_threshold(own, bins=params.otsu_bins)
        if filterable:
            removed_local = SampleIndexSet(
                np.flatnonzero(own > otsu.threshold).astype(np.int64)
            )

    to_global = members.indices
    return ClassProfile(
        class_id=class_id,
        members=members,
        core_set=SampleIndexSet(to_global[core_local.indices]),
        centroid=centroid,
        own_distances=own,
        modality=verdict,
        kde_curve=curve,
        otsu=otsu,
        removed=SampleIndexSet(to_global[removed_local.indices]),
        cluster_sizes=cluster_sizes,
        noise_count=noise_count,
        warnings=warnings,
    )


def denoise(ds: EmbeddingDataset, params: DenoiseParams) -> DenoiseOutcome:
    """Run the per-class filter and assemble the global kept/removed split."""
    if ds.labels is None:
        raise DataError("denoise requires a labeled dataset")
    features = ds.features
    if params.l2_normalize:
        features = l2_normalize_rows(features)

    member_sets = [ds.class_members(j) for j in range(ds.k)]
    for j, members in enumerate(member_sets):
        if len(members) < params.min_class_size:
            raise PipelineError(
                f"class {j} has {len(members)} samples, below the minimum "
                f"{params.min_class_size}"
            )

    def run(j: int) -> ClassProfile:
        return _class_profile(features, member_sets[j], j, params)

    if params.threads > 1:
        with ThreadPoolExecutor(max_workers=params.threads) as pool:
            profiles = list(pool.map(run, range(ds.k)))
    else:
        profiles = [run(j) for j in range(ds.k)]

    removed = SampleIndexSet.empty()
    for p in profiles:  # ordered reduce: class id order
        removed = removed.union(p.removed)
    kept = ds.labeled_indices().difference(removed)
    for j, p in enumerate(profiles):
        if len(p.kept) == 0:
            raise PipelineError(f"denoising removed every sample of class {j}")
    return DenoiseOutcome(
        kept=kept,
        removed=removed,
        profiles=profiles,
        params=params,
        n=ds.n,
        dim=ds.dim,
        k=ds.k,
    )


def _score_against_truth(
    outcome: DenoiseOutcome, noise_mask: np.ndarray, labels: np.ndarray
) -> dict:
    noise_mask = np.asarray(noise_mask, dtype=bool)
    removed_mask = outcome.removed.mask(noise_mask.size)
    kept_mask = outcome.kept.mask(noise_mask.size)
    labeled = np.asarray(labels) >= 0

    def safe_div(a: int, b: int) -> float | None:
        return (a / b) if b else None

    per_class = []
    for p in outcome.profiles:
        cls = p.members.mask(noise_mask.size)
        noisy = int(np.count_nonzero(cls & noise_mask))
        hit = int(np.count_nonzero(cls & noise_mask & removed_mask))
        rem = int(np.count_nonzero(cls & removed_mask))
        keptn = int(np.count_nonzero(cls & kept_mask))
        per_class.append(
            {
                "class_id": p.class_id,
                "noisy": noisy,
                "removed": rem,
                "recall": safe_div(hit, noisy),
                "precision": safe_div(hit, rem),
                "residual_noise_fraction": safe_div(
                    int(np.count_nonzero(cls & kept_mask & noise_mask)), keptn
                ),
            }
        )
    noisy_total = int(np.count_nonzero(noise_mask & labeled))
    hit_total = int(np.count_nonzero(noise_mask & removed_mask))
    removed_total = int(np.count_nonzero(removed_mask))
    kept_total = int(np.count_nonzero(kept_mask))
    return {
        "overall": {
            "noisy": noisy_total,
            "removed": removed_total,
            "recall": safe_div(hit_total, noisy_total),
            "precision": safe_div(hit_total, removed_total),
            "residual_noise_fraction": safe_div(
                int(np.count_nonzero(kept_mask & noise_mask)), kept_total
            ),
        },
        "per_class": per_class,
    }


def denoise_report(
    outcome: DenoiseOutcome,
    config: dict | None = None,
    noise_mask: np.ndarray | None = None,
    labels: np.ndarray | None = None,
    timings: dict | None = None,
) -> dict:
    """Machine-readable summary; JSON-native types only, fixed key order."""
    classes = []
    for p in outcome.profiles:
        classes.append(
            {
                "class_id": p.class_id,
                "counts": {
                    "members": len(p.members),
                    "core": len(p.core_set),
                    "removed": len(p.removed),
                    "kept": len(p.kept),
                    "dbscan_clusters": len(p.cluster_sizes),
                    "dbscan_noise": p.noise_count,
                },
                "cluster_sizes": list(p.cluster_sizes),
                "centroid": [float(x) for x in p.centroid],
                "distance_stats": {
                    "min": float(p.own_distances.min()),
                    "max": float(p.own_distances.max()),
                    "mean": float(p.own_distances.mean()),
                    "std": float(p.own_distances.std()),
                },
                "modality": {
                    "verdict": p.modality.verdict,
                    "peak_count": p.modality.peak_count,
                    "peak_locations": [float(x) for x in p.modality.peak_locations],
                },
                "kde": {
                    "bandwidth": float(p.kde_curve.bandwidth),
                    "grid": [float(x) for x in p.kde_curve.grid],
                    "pdf": [float(x) for x in p.kde_curve.pdf],
                },
                "otsu": None
                if p.otsu is None
                else {
                    "threshold": p.otsu.threshold,
                    "sigma_b": p.otsu.sigma_b,
                    "histogram": [int(c) for c in p.otsu.histogram],
                    "bin_edges": [float(e) for e in p.otsu.bin_edges],
                },
                "tau": p.tau,
                "removed_indices": p.removed.indices.tolist(),
                "warnings": list(p.warnings),
            }
        )
    labeled_total = sum(len(p.members) for p in outcome.profiles)
    report = {
        "schema": REPORT_SCHEMA,
        "command": "denoise",
        "config": dict(config) if config else asdict(outcome.params),
        "dataset": {"n": outcome.n, "dim": outcome.dim, "k": outcome.k},
        "totals": {
            "labeled": labeled_total,
            "kept": len(outcome.kept),
            "removed": len(outcome.removed),
            "removed_fraction": len(outcome.removed) / labeled_total,
        },
        "classes": classes,
        "ground_truth_scores": None,
    }
    if noise_mask is not None and labels is not None:
        report["ground_truth_scores"] = _score_against_truth(outcome, noise_mask, labels)
    if timings is not None:
        report["timings"] = timings
    return report
