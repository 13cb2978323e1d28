import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make oracles importable

from densefilter import EmbeddingDataset


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def labeled_dataset(rng, n=30, dim=4, k=3) -> EmbeddingDataset:
    feats = rng.normal(size=(n, dim)).astype(np.float32)
    labels = np.concatenate(
        [np.arange(k), rng.integers(0, k, size=n - k)]
    ).astype(np.int32)
    return EmbeddingDataset(features=feats, labels=labels, k=k)
