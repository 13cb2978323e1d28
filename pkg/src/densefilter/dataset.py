"""Embedding datasets and their on-disk formats.

The canonical container is the EMB1 binary layout (little-endian, no padding):

    magic "EMB1" | u32 version=1 | u32 n | u32 dim | u8 has_labels
    | if has_labels: u32 k
    | n*dim float32 features, row-major
    | if has_labels: n int32 labels

Label value -1 marks an unlabeled row; labeled rows must be in [0, k) and
every class id in [0, k) must occur at least once. CSV (header
``f0,...,f{dim-1}[,label]``) is supported for human-scale debugging only and
round-trips floats to 6 significant digits.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError

MAGIC = b"EMB1"
VERSION = 1
UNLABELED = -1

_HEADER = struct.Struct("<4sIIIB")


@dataclass(frozen=True)
class SampleIndexSet:
    """Sorted, deduplicated sample positions into an EmbeddingDataset."""

    indices: np.ndarray

    def __post_init__(self) -> None:
        idx = np.asarray(self.indices, dtype=np.int64)
        if idx.ndim != 1:
            raise DataError("index set must be one-dimensional")
        if idx.size and (np.any(idx[1:] <= idx[:-1]) or idx[0] < 0):
            raise DataError("indices must be non-negative and strictly increasing")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def from_any(cls, values) -> "SampleIndexSet":
        """Build from an arbitrary iterable; sorts and deduplicates."""
        idx = np.unique(np.asarray(list(values), dtype=np.int64))
        return cls(idx)

    @classmethod
    def empty(cls) -> "SampleIndexSet":
        return cls(np.empty(0, dtype=np.int64))

    def __len__(self) -> int:
        return int(self.indices.size)

    def __iter__(self):
        return iter(self.indices.tolist())

    def union(self, other: "SampleIndexSet") -> "SampleIndexSet":
        return SampleIndexSet(np.union1d(self.indices, other.indices))

    def difference(self, other: "SampleIndexSet") -> "SampleIndexSet":
        return SampleIndexSet(np.setdiff1d(self.indices, other.indices))

    def mask(self, n: int) -> np.ndarray:
        m = np.zeros(n, dtype=bool)
        m[self.indices] = True
        return m


@dataclass(frozen=True)
class EmbeddingDataset:
    """n feature vectors of dimension dim, with optional class labels.

    Immutable after construction; safe to share across workers.
    """

    features: np.ndarray
    labels: np.ndarray | None = None
    k: int | None = None
    n: int = field(init=False)
    dim: int = field(init=False)

    def __post_init__(self) -> None:
        feats = np.ascontiguousarray(np.asarray(self.features, dtype=np.float32))
        if feats.ndim != 2 or feats.shape[0] < 1 or feats.shape[1] < 1:
            raise DataError("features must be a non-empty 2-D matrix")
        if not np.all(np.isfinite(feats)):
            bad = int(np.argwhere(~np.isfinite(feats))[0][0])
            raise DataError(f"non-finite feature value in row {bad}")
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "n", int(feats.shape[0]))
        object.__setattr__(self, "dim", int(feats.shape[1]))

        if self.labels is None:
            if self.k is not None:
                raise DataError("k given without labels")
            return
        labels = np.asarray(self.labels, dtype=np.int32)
        if labels.shape != (self.n,):
            raise DataError(f"labels must have shape ({self.n},), got {labels.shape}")
        if self.k is None or self.k < 1:
            raise DataError("labeled dataset requires k >= 1")
        k = int(self.k)
        if labels.min(initial=0) < UNLABELED or labels.max(initial=UNLABELED) >= k:
            bad = int(np.argwhere((labels < UNLABELED) | (labels >= k))[0][0])
            raise DataError(
                f"label {int(labels[bad])} out of range [0, {k}) at row {bad}"
            )
        present = np.unique(labels[labels >= 0])
        if present.size < k:
            missing = sorted(set(range(k)) - set(present.tolist()))
            raise DataError(f"class ids with no samples: {missing}")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "k", k)

    @property
    def has_labels(self) -> bool:
        return self.labels is not None

    def labeled_indices(self) -> SampleIndexSet:
        """Positions of rows with a class label (label >= 0)."""
        if self.labels is None:
            return SampleIndexSet.empty()
        return SampleIndexSet(np.flatnonzero(self.labels >= 0).astype(np.int64))

    def class_members(self, class_id: int) -> SampleIndexSet:
        if self.labels is None:
            raise DataError("dataset has no labels")
        return SampleIndexSet(np.flatnonzero(self.labels == class_id).astype(np.int64))


def save_dataset(ds: EmbeddingDataset, path, format: str = "binary") -> None:
    """Write a dataset; binary round-trips bit-exactly, CSV to 6 digits."""
    if format == "binary":
        _save_binary(ds, path)
    elif format == "csv":
        _save_csv(ds, path)
    else:
        raise DataError(f"unknown format {format!r}")


def load_dataset(path, format: str = "binary") -> EmbeddingDataset:
    """Read a dataset, validating every invariant; errors carry positions."""
    if format == "binary":
        return _load_binary(path)
    if format == "csv":
        return _load_csv(path)
    raise DataError(f"unknown format {format!r}")


def _save_binary(ds: EmbeddingDataset, path) -> None:
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, ds.n, ds.dim, int(ds.has_labels)))
        if ds.has_labels:
            fh.write(struct.pack("<I", ds.k))
        fh.write(ds.features.astype("<f4", copy=False).tobytes())
        if ds.has_labels:
            fh.write(ds.labels.astype("<i4", copy=False).tobytes())


def _load_binary(path) -> EmbeddingDataset:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise DataError(f"truncated header: {len(raw)} bytes (need {_HEADER.size})")
    magic, version, n, dim, has_labels = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise DataError(f"bad magic {magic!r} at byte 0")
    if version != VERSION:
        raise DataError(f"unsupported version {version} at byte 4")
    if has_labels not in (0, 1):
        raise DataError(f"has_labels flag must be 0 or 1 at byte 16, got {has_labels}")
    offset = _HEADER.size
    k = None
    if has_labels:
        if len(raw) < offset + 4:
            raise DataError(f"truncated k field at byte {offset}")
        (k,) = struct.unpack_from("<I", raw, offset)
        offset += 4
    expected = offset + 4 * n * dim + (4 * n if has_labels else 0)
    if len(raw) != expected:
        raise DataError(
            f"size mismatch: {len(raw)} bytes, header implies {expected} "
            f"(n={n}, dim={dim}, has_labels={has_labels})"
        )
    feats = np.frombuffer(raw, dtype="<f4", count=n * dim, offset=offset)
    bad = np.flatnonzero(~np.isfinite(feats))
    if bad.size:
        raise DataError(f"non-finite value at byte {offset + 4 * int(bad[0])}")
    feats = feats.reshape(n, dim)
    labels = None
    if has_labels:
        labels = np.frombuffer(raw, dtype="<i4", count=n, offset=offset + 4 * n * dim)
    try:
        return EmbeddingDataset(features=feats, labels=labels, k=k)
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from None


def _fmt(x: float) -> str:
    return format(float(x), ".6g")


def _save_csv(ds: EmbeddingDataset, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        header = [f"f{d}" for d in range(ds.dim)]
        if ds.has_labels:
            header.append("label")
        fh.write(",".join(header) + "\n")
        for i in range(ds.n):
            row = [_fmt(v) for v in ds.features[i]]
            if ds.has_labels:
                row.append(str(int(ds.labels[i])))
            fh.write(",".join(row) + "\n")


def _load_csv(path) -> EmbeddingDataset:
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().strip()
        if not header:
            raise DataError("empty file (no header at line 1)")
        cols = header.split(",")
        has_labels = cols[-1] == "label"
        dim = len(cols) - (1 if has_labels else 0)
        if dim < 1 or cols[:dim] != [f"f{d}" for d in range(dim)]:
            raise DataError(f"malformed header at line 1: {header!r}")
        feats: list[list[float]] = []
        labels: list[int] = []
        for lineno, line in enumerate(fh, start=2):
            parts = line.strip().split(",")
            if len(parts) != len(cols):
                raise DataError(
                    f"expected {len(cols)} fields at line {lineno}, got {len(parts)}"
                )
            try:
                vals = [float(p) for p in parts[:dim]]
            except ValueError as exc:
                raise DataError(f"unparseable value at line {lineno}: {exc}") from None
            if not all(np.isfinite(vals)):
                raise DataError(f"non-finite value at line {lineno}")
            feats.append(vals)
            if has_labels:
                try:
                    labels.append(int(parts[dim]))
                except ValueError:
                    raise DataError(f"unparseable label at line {lineno}") from None
    if not feats:
        raise DataError("no data rows (file ends at line 1)")
    arr = np.asarray(feats, dtype=np.float32)
    if not has_labels:
        return EmbeddingDataset(features=arr)
    lab = np.asarray(labels, dtype=np.int32)
    valid = lab[lab >= 0]
    if valid.size == 0:
        raise DataError("label column present but every row is unlabeled")
    return EmbeddingDataset(features=arr, labels=lab, k=int(valid.max()) + 1)


def subset(ds: EmbeddingDataset, keep: SampleIndexSet) -> EmbeddingDataset:
    """Row-select a dataset, preserving the class universe k.

    Raises if the keep set is empty, references rows beyond n, or would drop
    every sample of some class (catastrophic over-filtering).
    """
    if len(keep) == 0:
        raise DataError("keep set is empty")
    idx = keep.indices
    if idx[-1] >= ds.n:
        raise DataError(f"keep index {int(idx[-1])} out of range for n={ds.n}")
    feats = ds.features[idx].copy()
    if ds.labels is None:
        return EmbeddingDataset(features=feats)
    labels = ds.labels[idx].copy()
    present = set(np.unique(labels[labels >= 0]).tolist())
    lost = sorted(set(range(ds.k)) - present)
    if lost:
        raise DataError(f"subset would empty classes {lost}")
    return EmbeddingDataset(features=feats, labels=labels, k=ds.k)


def save_index_file(indices: SampleIndexSet, path) -> None:
    """One decimal index per line, sorted ascending."""
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        for i in indices:
            fh.write(f"{i}\n")


def load_index_file(path, n: int | None = None) -> SampleIndexSet:
    values = []
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                values.append(int(line))
            except ValueError:
                raise DataError(f"unparseable index at line {lineno}") from None
    idx = SampleIndexSet.from_any(values)
    if n is not None and len(idx) and idx.indices[-1] >= n:
        raise DataError(f"index {int(idx.indices[-1])} out of range for n={n}")
    return idx
