"""Standalone EMB1 writer/reader.

Layout (little-endian, no padding):
    "EMB1" | u32 version=1 | u32 n | u32 dim | u8 has_labels
    | if has_labels: u32 k
    | n*dim f32 row-major | if has_labels: n i32 labels (-1 = unlabeled)

Deliberately independent of the densefilter package so the two codecs can
cross-check each other byte for byte.
"""

from __future__ import annotations

import struct

import numpy as np

MAGIC = b"EMB1"
VERSION = 1
_HEADER = struct.Struct("<4sIIIB")


def write_emb1(path, features: np.ndarray, labels: np.ndarray | None = None,
               k: int | None = None) -> None:
    feats = np.ascontiguousarray(features, dtype="<f4")
    if feats.ndim != 2 or feats.shape[0] < 1:
        raise ValueError("features must be a non-empty 2-D matrix")
    if not np.all(np.isfinite(feats)):
        raise ValueError("features contain non-finite values")
    n, dim = feats.shape
    has_labels = labels is not None
    if has_labels:
        lab = np.ascontiguousarray(labels, dtype="<i4")
        if lab.shape != (n,):
            raise ValueError("labels must be one per row")
        if k is None:
            k = int(lab.max()) + 1
        if lab.min() < -1 or lab.max() >= k:
            raise ValueError(f"labels outside {{-1}} | [0, {k})")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, n, dim, int(has_labels)))
        if has_labels:
            fh.write(struct.pack("<I", k))
        fh.write(feats.tobytes())
        if has_labels:
            fh.write(lab.tobytes())


def read_emb1(path):
    """Returns (features f32, labels i32 | None, k | None)."""
    with open(path, "rb") as fh:
        raw = fh.read()
    magic, version, n, dim, has_labels = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC or version != VERSION:
        raise ValueError(f"{path}: not an EMB1 v1 file")
    offset = _HEADER.size
    k = None
    if has_labels:
        (k,) = struct.unpack_from("<I", raw, offset)
        offset += 4
    feats = np.frombuffer(raw, dtype="<f4", count=n * dim, offset=offset)
    feats = feats.reshape(n, dim).copy()
    labels = None
    if has_labels:
        labels = np.frombuffer(
            raw, dtype="<i4", count=n, offset=offset + 4 * n * dim
        ).copy()
    return feats, labels, k
