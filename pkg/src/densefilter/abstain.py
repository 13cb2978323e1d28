"""Stage 2: classify-or-abstain on test embeddings.

Calibration derives, from kept training samples only, the per-class maximum
own-centroid distance tau_j and carries the centroids forward. At inference a
sample's distances to all centroids give c_min = argmin (ties to the lower
class id); the sample is abstained as out-of-distribution when
d_min > tau_{c_min}, otherwise abstained as ambiguous when the gap between
its two smallest distances falls inside the tolerance eta, otherwise
predicted as c_min.

The ambiguity comparison defaults to "gap < eta abstains" (larger eta
abstains more, which is what makes eta a coverage dial); the literal flag
flips the comparison to "gap > eta abstains" for side-by-side study.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .dataset import EmbeddingDataset
from .denoise import DenoiseOutcome
from .errors import DataError, PipelineError
from .geometry import l2_normalize_rows

CALIBRATION_SCHEMA = "densefilter-calibration/1"

PREDICT = "predict"
ABSTAIN_OOD = "abstain_ood"
ABSTAIN_AMBIGUOUS = "abstain_ambiguous"


@dataclass(frozen=True)
class AbstainCalibration:
    centroids: np.ndarray  # k x dim
    tau: np.ndarray  # k
    eta: float
    l2_normalize: bool = False
    ambiguity_literal: bool = False

    def __post_init__(self) -> None:
        c = np.asarray(self.centroids, dtype=np.float64)
        t = np.asarray(self.tau, dtype=np.float64)
        if c.ndim != 2 or t.shape != (c.shape[0],):
            raise DataError("centroids must be k x dim with a matching tau vector")
        if np.any(t < 0) or not np.all(np.isfinite(c)):
            raise DataError("tau must be non-negative and centroids finite")
        if self.eta < 0:
            raise DataError("eta must be >= 0")
        object.__setattr__(self, "centroids", c)
        object.__setattr__(self, "tau", t)

    @property
    def k(self) -> int:
        return int(self.centroids.shape[0])

    @property
    def dim(self) -> int:
        return int(self.centroids.shape[1])

    def to_json_dict(self, config: dict | None = None) -> dict:
        obj = {
            "schema": CALIBRATION_SCHEMA,
            "k": self.k,
            "dim": self.dim,
            "eta": self.eta,
            "ambiguity_literal": self.ambiguity_literal,
            "l2_normalize": self.l2_normalize,
            "tau": [float(x) for x in self.tau],
            "centroids": [[float(x) for x in row] for row in self.centroids],
        }
        if config is not None:
            obj["config"] = dict(config)
        return obj

    @classmethod
    def from_json_dict(cls, obj: dict) -> "AbstainCalibration":
        if obj.get("schema") != CALIBRATION_SCHEMA:
            raise DataError(f"unexpected calibration schema {obj.get('schema')!r}")
        return cls(
            centroids=np.asarray(obj["centroids"], dtype=np.float64),
            tau=np.asarray(obj["tau"], dtype=np.float64),
            eta=float(obj["eta"]),
            l2_normalize=bool(obj.get("l2_normalize", False)),
            ambiguity_literal=bool(obj.get("ambiguity_literal", False)),
        )


@dataclass(frozen=True)
class FilterDecision:
    sample_index: int
    verdict: str
    predicted_class: int | None
    d_min: float
    second_d: float | None
    nearest_two: tuple[int, int]

    @property
    def gap(self) -> float | None:
        return None if self.second_d is None else self.second_d - self.d_min


def calibrate(
    train: EmbeddingDataset, outcome: DenoiseOutcome, eta: float,
    ambiguity_literal: bool = False,
) -> AbstainCalibration:
    """tau_j from kept members' own distances; centroids from the profiles."""
    if eta < 0:
        raise DataError("eta must be >= 0")
    if train.k != outcome.k:
        raise DataError("dataset/outcome class count mismatch")
    cents = np.stack([p.centroid for p in outcome.profiles])
    tau = np.empty(outcome.k, dtype=np.float64)
    for p in outcome.profiles:
        kept_mask = ~np.isin(p.members.indices, p.removed.indices)
        if not np.any(kept_mask):
            raise PipelineError(f"class {p.class_id} has no kept samples")
        tau[p.class_id] = float(p.own_distances[kept_mask].max())
        p.tau = tau[p.class_id]
    return AbstainCalibration(
        centroids=cents,
        tau=tau,
        eta=eta,
        l2_normalize=outcome.params.l2_normalize,
        ambiguity_literal=ambiguity_literal,
    )


def calibrate_from_kept(
    train: EmbeddingDataset, kept, eta: float, l2_normalize: bool = False,
    ambiguity_literal: bool = False,
) -> AbstainCalibration:
    """Calibration without a denoise outcome: median centroids over the kept
    rows of each class stand in for the core-cluster centroids."""
    from .synth import fit_label_centroids

    features = train.features
    if l2_normalize:
        features = l2_normalize_rows(features)
        train = EmbeddingDataset(features=features, labels=train.labels, k=train.k)
    cents = fit_label_centroids(train, kept)
    kept_idx = kept.indices
    tau = np.empty(train.k, dtype=np.float64)
    for j in range(train.k):
        rows = kept_idx[train.labels[kept_idx] == j]
        if rows.size == 0:
            raise PipelineError(f"class {j} has no kept samples")
        diff = features[rows].astype(np.float64) - cents[j]
        tau[j] = float(np.sqrt(np.einsum("ij,ij->i", diff, diff)).max())
    return AbstainCalibration(
        centroids=cents, tau=tau, eta=eta,
        l2_normalize=l2_normalize, ambiguity_literal=ambiguity_literal,
    )


def _decision_rows(
    features: np.ndarray, cal: AbstainCalibration
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    feats = np.asarray(features, dtype=np.float64)
    if not np.all(np.isfinite(feats)):
        raise DataError("non-finite feature values in test input")
    if cal.l2_normalize:
        feats = l2_normalize_rows(feats)
    d = cdist(feats, cal.centroids)
    order = np.argsort(d, axis=1, kind="stable")
    c_min = order[:, 0]
    d_min = d[np.arange(d.shape[0]), c_min]
    if cal.k > 1:
        c_second = order[:, 1]
        d_second = d[np.arange(d.shape[0]), c_second]
    else:
        c_second = c_min
        d_second = np.full(d.shape[0], np.nan)
    return c_min, d_min, c_second, d_second


def _verdicts(
    c_min: np.ndarray, d_min: np.ndarray, d_second: np.ndarray, cal: AbstainCalibration
) -> np.ndarray:
    ood = d_min > cal.tau[c_min]
    if cal.k > 1:
        gap = d_second - d_min
        ambiguous = (gap > cal.eta) if cal.ambiguity_literal else (gap < cal.eta)
    else:
        ambiguous = np.zeros_like(ood)
    out = np.where(ood, ABSTAIN_OOD, np.where(ambiguous, ABSTAIN_AMBIGUOUS, PREDICT))
    return out


def decide(sample: np.ndarray, cal: AbstainCalibration) -> FilterDecision:
    """Verdict for a single feature vector."""
    v = np.asarray(sample, dtype=np.float64).reshape(1, -1)
    if v.shape[1] != cal.dim:
        raise DataError(f"dimension mismatch: sample {v.shape[1]}, centroids {cal.dim}")
    c_min, d_min, c_second, d_second = _decision_rows(v, cal)
    verdict = _verdicts(c_min, d_min, d_second, cal)[0]
    second = None if np.isnan(d_second[0]) else float(d_second[0])
    return FilterDecision(
        sample_index=0,
        verdict=str(verdict),
        predicted_class=int(c_min[0]) if verdict == PREDICT else None,
        d_min=float(d_min[0]),
        second_d=second,
        nearest_two=(int(c_min[0]), int(c_second[0])),
    )


def filter_testset(
    test: EmbeddingDataset, cal: AbstainCalibration
) -> tuple[list[FilterDecision], dict]:
    """One decision per test row plus a coverage/accuracy summary."""
    if test.dim != cal.dim:
        raise DataError(f"dimension mismatch: test {test.dim}, centroids {cal.dim}")
    c_min, d_min, c_second, d_second = _decision_rows(test.features, cal)
    verdicts = _verdicts(c_min, d_min, d_second, cal)
    decisions = []
    for i in range(test.n):
        second = None if np.isnan(d_second[i]) else float(d_second[i])
        verdict = str(verdicts[i])
        decisions.append(
            FilterDecision(
                sample_index=i,
                verdict=verdict,
                predicted_class=int(c_min[i]) if verdict == PREDICT else None,
                d_min=float(d_min[i]),
                second_d=second,
                nearest_two=(int(c_min[i]), int(c_second[i])),
            )
        )
    predicted = verdicts == PREDICT
    summary = {
        "n": test.n,
        "coverage": float(np.mean(predicted)),
        "counts": {
            PREDICT: int(np.count_nonzero(predicted)),
            ABSTAIN_OOD: int(np.count_nonzero(verdicts == ABSTAIN_OOD)),
            ABSTAIN_AMBIGUOUS: int(np.count_nonzero(verdicts == ABSTAIN_AMBIGUOUS)),
        },
        "eta": cal.eta,
        "selective_accuracy": None,
    }
    if test.labels is not None:
        scored = predicted & (test.labels >= 0)
        if np.any(scored):
            summary["selective_accuracy"] = float(
                np.mean(c_min[scored] == test.labels[scored])
            )
    return decisions, summary


def eta_for_coverage(
    test: EmbeddingDataset, cal: AbstainCalibration, target_coverage: float
) -> tuple[float, float]:
    """Smallest eta whose realized coverage is <= target; returns (eta, coverage).

    Only meaningful under the default ambiguity rule, where raising eta
    abstains more. Raises when the OOD rule alone already caps coverage below
    the target, since no eta can add coverage back.
    """
    if cal.ambiguity_literal:
        raise PipelineError("eta_for_coverage requires the default ambiguity rule")
    if not (0.0 < target_coverage <= 1.0):
        raise DataError(f"target coverage must be in (0, 1], got {target_coverage}")
    c_min, d_min, _, d_second = _decision_rows(test.features, cal)
    non_ood = d_min <= cal.tau[c_min]
    n = test.n
    ood_only_coverage = float(np.mean(non_ood))
    if target_coverage > ood_only_coverage:
        raise PipelineError(
            f"target coverage {target_coverage} unreachable: the OOD rule alone "
            f"caps coverage at {ood_only_coverage}"
        )
    if cal.k == 1:
        return 0.0, ood_only_coverage
    gaps = (d_second - d_min)[non_ood]
    if ood_only_coverage <= target_coverage:
        return 0.0, ood_only_coverage
    # Candidates just above each observed gap: at eta = nextafter(g) exactly
    # the rows with gap <= g abstain as ambiguous.
    for g in np.unique(gaps):
        cov = float(np.count_nonzero(gaps > g)) / n
        if cov <= target_coverage:
            return float(np.nextafter(g, np.inf)), cov
    raise PipelineError("unreachable: coverage would end at 0")


def decisions_to_csv(decisions: list[FilterDecision], path) -> None:
    """index,verdict,predicted_class,d_min,second_d,gap (floats via repr)."""
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("index,verdict,predicted_class,d_min,second_d,gap\n")
        for d in decisions:
            pred = "" if d.predicted_class is None else str(d.predicted_class)
            second = "" if d.second_d is None else repr(d.second_d)
            gap = "" if d.gap is None else repr(d.gap)
            fh.write(f"{d.sample_index},{d.verdict},{pred},{d.d_min!r},{second},{gap}\n")


def save_calibration(cal: AbstainCalibration, path, config: dict | None = None) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        json.dump(cal.to_json_dict(config), fh, indent=2)
        fh.write("\n")


def load_calibration(path) -> AbstainCalibration:
    with open(path, "r", encoding="ascii") as fh:
        return AbstainCalibration.from_json_dict(json.load(fh))
