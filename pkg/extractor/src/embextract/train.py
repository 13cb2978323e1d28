"""Short pretraining loop for the feature extractor.

Deliberately conservative: SGD with weight decay and an epoch cap, because
the features must be taken while the network still tracks dominant patterns
rather than memorized labels. Raise epochs at your own risk on noisy data.
"""

from __future__ import annotations

import numpy as np
import torch
import torch.nn as nn


def train_model(
    model: nn.Module,
    images: np.ndarray,
    labels: np.ndarray,
    epochs: int = 4,
    batch_size: int = 64,
    lr: float = 0.05,
    weight_decay: float = 5e-4,
    seed: int = 1,
    device: str = "cpu",
) -> dict:
    """In-place training; returns per-epoch loss/accuracy history."""
    torch.manual_seed(seed)
    model = model.to(device).train()
    x = torch.from_numpy(np.ascontiguousarray(images, dtype=np.float32))
    y = torch.from_numpy(np.ascontiguousarray(labels, dtype=np.int64))
    opt = torch.optim.SGD(
        model.parameters(), lr=lr, momentum=0.9, weight_decay=weight_decay
    )
    loss_fn = nn.CrossEntropyLoss()
    rng = np.random.default_rng(seed)
    history = {"loss": [], "accuracy": []}
    n = x.shape[0]
    for _ in range(epochs):
        order = rng.permutation(n)
        total_loss = correct = 0
        for start in range(0, n, batch_size):
            idx = order[start : start + batch_size]
            bx, by = x[idx].to(device), y[idx].to(device)
            opt.zero_grad()
            logits = model(bx)
            loss = loss_fn(logits, by)
            loss.backward()
            opt.step()
            total_loss += float(loss.detach()) * len(idx)
            correct += int((logits.argmax(1) == by).sum())
        history["loss"].append(total_loss / n)
        history["accuracy"].append(correct / n)
    model.eval()
    return history
