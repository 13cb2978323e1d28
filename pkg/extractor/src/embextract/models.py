"""Model zoo: a small CNN trainable on CPU in seconds, plus torchvision
ResNets for real checkpoints. Feature extraction taps the penultimate
activations (the classifier head's input) by default."""

from __future__ import annotations

import torch
import torch.nn as nn


class TinyCNN(nn.Module):
    """Three conv blocks, global pooling, one hidden fc; head is `classifier`."""

    def __init__(self, num_classes: int, feature_dim: int = 64):
        super().__init__()
        self.features = nn.Sequential(
            nn.Conv2d(3, 16, 3, padding=1), nn.BatchNorm2d(16), nn.ReLU(),
            nn.MaxPool2d(2),
            nn.Conv2d(16, 32, 3, padding=1), nn.BatchNorm2d(32), nn.ReLU(),
            nn.MaxPool2d(2),
            nn.Conv2d(32, 64, 3, padding=1), nn.BatchNorm2d(64), nn.ReLU(),
            nn.AdaptiveAvgPool2d(1), nn.Flatten(),
        )
        self.embed = nn.Sequential(nn.Linear(64, feature_dim), nn.ReLU())
        self.classifier = nn.Linear(feature_dim, num_classes)

    def forward(self, x):
        return self.classifier(self.embed(self.features(x)))

    def penultimate(self, x):
        return self.embed(self.features(x))


def build_model(name: str, num_classes: int, weights_path=None) -> nn.Module:
    if name == "tinycnn":
        model = TinyCNN(num_classes)
    elif name in ("resnet18", "resnet34"):
        from torchvision import models as tv_models

        ctor = tv_models.resnet18 if name == "resnet18" else tv_models.resnet34
        model = ctor(weights=None, num_classes=num_classes)
    else:
        raise ValueError(f"unknown model {name!r}")
    if weights_path is not None:
        state = torch.load(weights_path, map_location="cpu", weights_only=True)
        model.load_state_dict(state)
    return model


@torch.no_grad()
def extract_features(model: nn.Module, images: torch.Tensor, layer: str,
                     batch_size: int, device: str) -> torch.Tensor:
    """Batch forward in eval mode; layer is "penultimate" or "logits"."""
    model = model.to(device).eval()
    outs = []
    for start in range(0, images.shape[0], batch_size):
        batch = images[start : start + batch_size].to(device)
        if layer == "logits":
            out = model(batch)
        elif layer == "penultimate":
            if isinstance(model, TinyCNN):
                out = model.penultimate(batch)
            else:  # torchvision resnet: everything up to the fc head
                out = _resnet_penultimate(model, batch)
        else:
            raise ValueError(f"unknown layer {layer!r}")
        outs.append(out.cpu())
    return torch.cat(outs)


def _resnet_penultimate(model, x):
    x = model.conv1(x)
    x = model.bn1(x)
    x = model.relu(x)
    x = model.maxpool(x)
    x = model.layer1(x)
    x = model.layer2(x)
    x = model.layer3(x)
    x = model.layer4(x)
    x = model.avgpool(x)
    return torch.flatten(x, 1)
