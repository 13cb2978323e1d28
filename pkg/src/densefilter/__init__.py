"""Density-based filtering of labeled embeddings.

Two pipelines over one geometric core: Stage 1 removes label noise from
training embeddings (per-class DBSCAN core cluster, median centroid, distance
modality test, Otsu cut); Stage 2 abstains from uncertain test samples
(max-distance OOD rule plus a nearest-two-centroids ambiguity tolerance).
"""

from .abstain import (
    AbstainCalibration,
    FilterDecision,
    calibrate,
    calibrate_from_kept,
    decide,
    eta_for_coverage,
    filter_testset,
    load_calibration,
    save_calibration,
)
from .clustering import ClusterAssignment, DbscanParams, core_cluster, dbscan
from .dataset import (
    EmbeddingDataset,
    SampleIndexSet,
    load_dataset,
    load_index_file,
    save_dataset,
    save_index_file,
    subset,
)
from .denoise import ClassProfile, DenoiseOutcome, DenoiseParams, denoise, denoise_report
from .density import KdeCurve, ModalityVerdict, count_peaks, kde
from .errors import DataError, DensefilterError, PipelineError
from .geometry import (
    CentroidSet,
    DistanceTable,
    ThresholdSet,
    class_centroids,
    distance_table,
    l2_normalize_rows,
    max_distance_thresholds,
    median_centroid,
)
from .synth import (
    GroundTruth,
    SynthConfig,
    generate,
    load_ground_truth,
    nearest_centroid_accuracy,
    save_ground_truth,
    split_train_test,
)
from .threshold import OtsuResult, otsu_threshold, split_by_threshold

__version__ = "0.1.0"

__all__ = [
    "AbstainCalibration",
    "CentroidSet",
    "ClassProfile",
    "ClusterAssignment",
    "DataError",
    "DbscanParams",
    "DenoiseOutcome",
    "DenoiseParams",
    "DensefilterError",
    "DistanceTable",
    "EmbeddingDataset",
    "FilterDecision",
    "GroundTruth",
    "KdeCurve",
    "ModalityVerdict",
    "OtsuResult",
    "PipelineError",
    "SampleIndexSet",
    "SynthConfig",
    "ThresholdSet",
    "calibrate",
    "calibrate_from_kept",
    "class_centroids",
    "core_cluster",
    "count_peaks",
    "dbscan",
    "decide",
    "denoise",
    "denoise_report",
    "distance_table",
    "eta_for_coverage",
    "filter_testset",
    "generate",
    "kde",
    "l2_normalize_rows",
    "load_calibration",
    "load_dataset",
    "load_ground_truth",
    "load_index_file",
    "max_distance_thresholds",
    "median_centroid",
    "nearest_centroid_accuracy",
    "otsu_threshold",
    "save_calibration",
    "save_dataset",
    "save_ground_truth",
    "save_index_file",
    "split_by_threshold",
    "split_train_test",
    "subset",
]
