"""Bridge from image datasets to EMB1 feature files."""

from .emb1 import read_emb1, write_emb1
from .extract import ExtractorConfig, extract, load_images
from .images import folder_dataset, shapes_dataset
from .models import TinyCNN, build_model, extract_features
from .noise import inject_label_noise
from .train import train_model

__version__ = "0.1.0"

__all__ = [
    "ExtractorConfig",
    "TinyCNN",
    "build_model",
    "extract",
    "extract_features",
    "folder_dataset",
    "inject_label_noise",
    "load_images",
    "read_emb1",
    "shapes_dataset",
    "train_model",
    "write_emb1",
]
