"""Feature export: run an image set through a model and write EMB1 plus a
JSON sidecar (model id, layer, preprocessing hash, file checksum)."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, asdict

import numpy as np
import torch

from .emb1 import write_emb1
from .images import folder_dataset, shapes_dataset
from .models import build_model, extract_features


@dataclass(frozen=True)
class ExtractorConfig:
    model: str = "tinycnn"
    weights: str | None = None
    dataset: str = "shapes"  # "shapes" | "folder:<path>" | "cifar10:<root>"
    split: str = "train"
    layer: str = "penultimate"
    batch_size: int = 128
    device: str = "cpu"
    out: str = "features.emb1"
    # shapes parameters
    shapes_k: int = 8
    shapes_per_class: int = 150
    shapes_seed: int = 1


def load_images(cfg: ExtractorConfig):
    if cfg.dataset == "shapes":
        return shapes_dataset(cfg.shapes_k, cfg.shapes_per_class, cfg.shapes_seed)
    if cfg.dataset.startswith("folder:"):
        return folder_dataset(cfg.dataset.split(":", 1)[1])
    if cfg.dataset.startswith("cifar10:"):
        from torchvision import datasets

        root = cfg.dataset.split(":", 1)[1]
        ds = datasets.CIFAR10(root, train=cfg.split == "train", download=False)
        images = ds.data.astype(np.float32).transpose(0, 3, 1, 2) / 255.0
        return images, np.asarray(ds.targets, dtype=np.int32)
    raise ValueError(f"unknown dataset {cfg.dataset!r}")


def extract(cfg: ExtractorConfig, model=None, images=None, labels=None) -> dict:
    """Write EMB1 for the configured dataset; returns the sidecar dict.

    A prebuilt model (and optionally in-memory images/labels) may be passed
    to skip reloading, e.g. right after training.
    """
    if images is None or labels is None:
        images, labels = load_images(cfg)
    k = int(np.max(labels)) + 1
    if model is None:
        model = build_model(cfg.model, num_classes=k, weights_path=cfg.weights)
    feats = extract_features(
        model,
        torch.from_numpy(np.ascontiguousarray(images, dtype=np.float32)),
        layer=cfg.layer,
        batch_size=cfg.batch_size,
        device=cfg.device,
    ).numpy()
    write_emb1(cfg.out, feats, labels=np.asarray(labels, dtype=np.int32), k=k)
    with open(cfg.out, "rb") as fh:
        emb1_sha = hashlib.sha256(fh.read()).hexdigest()
    pre = hashlib.sha256(
        json.dumps(
            {"dataset": cfg.dataset, "split": cfg.split, "layer": cfg.layer,
             "n": int(feats.shape[0]), "scale": "unit-float"},
            sort_keys=True,
        ).encode()
    ).hexdigest()
    sidecar = {
        "config": asdict(cfg),
        "n": int(feats.shape[0]),
        "dim": int(feats.shape[1]),
        "k": k,
        "preprocessing_sha256": pre,
        "emb1_sha256": emb1_sha,
    }
    with open(str(cfg.out) + ".json", "w", encoding="ascii") as fh:
        json.dump(sidecar, fh, indent=2)
        fh.write("\n")
    return sidecar
