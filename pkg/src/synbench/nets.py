"""Compact convolutional backbone shared by the predictive model and the
desk-scale FID embedder.

Four blocks with stride-2 downsampling and channel doubling, global average
pooling, and a linear multi-label head driven through sigmoids. No
pretraining; the side length only has to survive four halvings.
"""

from __future__ import annotations

import numpy as np
import torch
from torch import nn


class SmallConvNet(nn.Module):
    def __init__(self, n_labels: int, width: int = 16):
        super().__init__()
        w = width
        self.width = width
        self.n_labels = n_labels
        self.blocks = nn.Sequential(
            nn.Conv2d(1, w, 3, stride=2, padding=1),
            nn.ReLU(inplace=True),
            nn.Conv2d(w, 2 * w, 3, stride=2, padding=1),
            nn.ReLU(inplace=True),
            nn.Conv2d(2 * w, 4 * w, 3, stride=2, padding=1),
            nn.ReLU(inplace=True),
            nn.Conv2d(4 * w, 8 * w, 3, stride=2, padding=1),
            nn.ReLU(inplace=True),
        )
        self.head = nn.Linear(8 * w, n_labels)

    @property
    def feature_dim(self) -> int:
        return 8 * self.width

    def features(self, x: torch.Tensor) -> torch.Tensor:
        """Pre-head pooled feature vector, shape (n, 8*width)."""
        h = self.blocks(x)
        return h.mean(dim=(2, 3))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.head(self.features(x))


def to_batch_tensor(images: np.ndarray) -> torch.Tensor:
    """(n, side, side) float array in [0,1] -> (n, 1, side, side) float32 tensor."""
    arr = np.asarray(images, dtype=np.float32)
    if arr.ndim == 2:
        arr = arr[None]
    return torch.from_numpy(arr).unsqueeze(1)


def batched_apply(fn, images: np.ndarray, batch_size: int = 256) -> np.ndarray:
    """Run fn over image batches without gradients; concatenate numpy outputs."""
    outs = []
    with torch.no_grad():
        for start in range(0, len(images), batch_size):
            x = to_batch_tensor(images[start : start + batch_size])
            outs.append(fn(x).numpy())
    return np.concatenate(outs, axis=0)
