"""Procedural image datasets: a seeded shapes benchmark plus a class-per-
subdirectory folder loader. Shapes classes pair a geometric mask with a hue,
jittered in position, size, brightness, and pixel noise, so a small CNN
learns them in a few epochs on CPU."""

from __future__ import annotations

import numpy as np

IMAGE_SIZE = 32

_HUES = np.array(
    [
        (0.9, 0.2, 0.2),
        (0.2, 0.8, 0.3),
        (0.25, 0.35, 0.9),
        (0.9, 0.8, 0.2),
        (0.8, 0.3, 0.8),
        (0.2, 0.8, 0.8),
        (0.95, 0.55, 0.15),
        (0.55, 0.35, 0.15),
        (0.6, 0.9, 0.4),
        (0.7, 0.7, 0.9),
    ]
)


def _mask(shape_id: int, cy: float, cx: float, r: float) -> np.ndarray:
    yy, xx = np.mgrid[0:IMAGE_SIZE, 0:IMAGE_SIZE].astype(np.float64)
    dy, dx = yy - cy, xx - cx
    if shape_id == 0:  # filled square
        return (np.abs(dy) <= r) & (np.abs(dx) <= r)
    if shape_id == 1:  # disc
        return dy * dy + dx * dx <= r * r
    if shape_id == 2:  # cross
        return ((np.abs(dy) <= r / 2.5) | (np.abs(dx) <= r / 2.5)) & (
            (np.abs(dy) <= r) & (np.abs(dx) <= r)
        )
    if shape_id == 3:  # triangle
        return (dy >= -r) & (dy <= r) & (np.abs(dx) <= (dy + r) / 2)
    if shape_id == 4:  # horizontal stripes
        return (np.abs(dy) <= r) & (np.abs(dx) <= r) & (yy.astype(int) % 4 < 2)
    if shape_id == 5:  # vertical stripes
        return (np.abs(dy) <= r) & (np.abs(dx) <= r) & (xx.astype(int) % 4 < 2)
    if shape_id == 6:  # ring
        d2 = dy * dy + dx * dx
        return (d2 <= r * r) & (d2 >= (0.55 * r) ** 2)
    if shape_id == 7:  # diamond
        return np.abs(dy) + np.abs(dx) <= r
    if shape_id == 8:  # checkerboard
        return (
            (np.abs(dy) <= r)
            & (np.abs(dx) <= r)
            & ((yy.astype(int) // 4 + xx.astype(int) // 4) % 2 == 0)
        )
    # dot grid
    return (
        (np.abs(dy) <= r)
        & (np.abs(dx) <= r)
        & (yy.astype(int) % 6 < 3)
        & (xx.astype(int) % 6 < 3)
    )


def shapes_dataset(k: int, per_class: int, seed: int = 1):
    """Returns (images float32 [n,3,32,32] in [0,1], labels int32)."""
    if not (1 <= k <= 10):
        raise ValueError("shapes supports 1..10 classes")
    rng = np.random.default_rng(seed)
    n = k * per_class
    images = np.empty((n, 3, IMAGE_SIZE, IMAGE_SIZE), dtype=np.float32)
    labels = np.repeat(np.arange(k, dtype=np.int32), per_class)
    for i, cls in enumerate(labels):
        cy, cx = rng.uniform(12, 20, size=2)
        r = rng.uniform(7, 11)
        brightness = rng.uniform(0.7, 1.0)
        color = _HUES[cls] * brightness
        mask = _mask(int(cls), cy, cx, r)
        img = rng.normal(0.12, 0.05, size=(3, IMAGE_SIZE, IMAGE_SIZE))
        img[:, mask] += color[:, None]
        img += rng.normal(0.0, 0.03, size=img.shape)
        images[i] = np.clip(img, 0.0, 1.0)
    return images, labels


def folder_dataset(root):
    """Images from class-per-subdirectory layout, labels by sorted dir name."""
    from pathlib import Path

    from PIL import Image

    rootp = Path(root)
    classes = sorted(p.name for p in rootp.iterdir() if p.is_dir())
    if not classes:
        raise ValueError(f"{root}: no class subdirectories")
    images, labels = [], []
    for j, name in enumerate(classes):
        for img_path in sorted((rootp / name).iterdir()):
            with Image.open(img_path) as im:
                arr = np.asarray(
                    im.convert("RGB").resize((IMAGE_SIZE, IMAGE_SIZE)),
                    dtype=np.float32,
                ) / 255.0
            images.append(arr.transpose(2, 0, 1))
            labels.append(j)
    return np.stack(images), np.asarray(labels, dtype=np.int32)
