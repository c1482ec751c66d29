"""Desk-scale FID embedder: the 64-dim feature layer of a small classifier
trained once on the corpus and frozen thereafter.

A pretrained natural-image coding layer can be slotted in behind the same
interface at full scale; the distance computation does not care where the
embeddings come from.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import torch
from torch import nn

from ..data.records import LabeledImageSet
from ..nets import SmallConvNet, batched_apply, to_batch_tensor
from .fid import Embedder

EMBEDDER_WIDTH = 8  # feature_dim = 8 * width = 64


class TorchEmbedder(Embedder):
    """Wraps a frozen feature extractor; input pixels in [0, 1]."""

    def __init__(self, net: SmallConvNet):
        self.net = net.eval()
        for p in self.net.parameters():
            p.requires_grad_(False)
        self.dim = net.feature_dim

    def embed(self, images: np.ndarray) -> np.ndarray:
        return batched_apply(self.net.features, images).astype(np.float64)


def train_embedder(
    train_set: LabeledImageSet,
    seed: int = 0,
    epochs: int = 5,
    batch_size: int = 64,
    lr: float = 1e-3,
    width: int = EMBEDDER_WIDTH,
) -> TorchEmbedder:
    """Fit the embedder classifier on the corpus once; deterministic given seed."""
    torch.manual_seed(seed)
    net = SmallConvNet(len(train_set.labels), width=width)
    images = train_set.pixel_array()
    labels = torch.from_numpy(train_set.label_array().astype(np.float32))
    opt = torch.optim.Adam(net.parameters(), lr=lr)
    loss_fn = nn.BCEWithLogitsLoss()
    rng = np.random.default_rng(seed)
    n = len(images)
    for _ in range(epochs):
        order = rng.permutation(n)
        for start in range(0, n, batch_size):
            idx = order[start : start + batch_size]
            x = to_batch_tensor(images[idx])
            y = labels[idx]
            opt.zero_grad()
            loss = loss_fn(net(x), y)
            loss.backward()
            opt.step()
    return TorchEmbedder(net)


def save_embedder(embedder: TorchEmbedder, path: str | Path) -> None:
    meta = {
        "version": 1,
        "width": embedder.net.width,
        "n_labels": embedder.net.n_labels,
    }
    arrays = {k: v.numpy() for k, v in embedder.net.state_dict().items()}
    np.savez(path, __meta__=np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8), **arrays)


def load_embedder(path: str | Path) -> TorchEmbedder:
    with np.load(path) as data:
        meta = json.loads(bytes(data["__meta__"]).decode())
        net = SmallConvNet(meta["n_labels"], width=meta["width"])
        state = {k: torch.from_numpy(data[k]) for k in data.files if k != "__meta__"}
    net.load_state_dict(state)
    return TorchEmbedder(net)
