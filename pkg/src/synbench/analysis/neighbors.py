"""Privacy audit: exact nearest-neighbor search in the predictive model's
feature space under cosine distance.

The search is a deliberate brute-force scan of the full training fold; the
audit must not depend on the recall of an approximate index. Candidates are
visited in image-id order so distance ties resolve to the smallest id.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import torch

from ..data.records import LabeledImageSet
from ..nets import SmallConvNet, batched_apply


@dataclass
class NeighborResult:
    syn_id: str
    train_id: str
    distance: float  # cosine distance in [0, 2]


def final_layer_embedding(model: SmallConvNet, images: np.ndarray) -> np.ndarray:
    """Pre-head pooled feature vectors; deterministic across calls."""
    arr = np.asarray(images, dtype=np.float32)
    single = arr.ndim == 2
    if single:
        arr = arr[None]
    out = batched_apply(model.features, arr).astype(np.float64)
    return out[0] if single else out


def _unit_rows(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    norms = np.linalg.norm(x, axis=1)
    zero = norms == 0
    if zero.any():
        warnings.warn(f"{int(zero.sum())} zero-norm embeddings; their cosine distance is 2")
    safe = np.where(zero, 1.0, norms)
    return x / safe[:, None], zero


def cosine_distances(queries: np.ndarray, candidates: np.ndarray) -> np.ndarray:
    """(q, c) matrix of cosine distances; zero-norm rows map to distance 2."""
    qn, qzero = _unit_rows(np.asarray(queries, dtype=np.float64))
    cn, czero = _unit_rows(np.asarray(candidates, dtype=np.float64))
    d = 1.0 - qn @ cn.T
    d[qzero, :] = 2.0
    d[:, czero] = 2.0
    return np.clip(d, 0.0, 2.0)


def nn_audit(
    syn_set: LabeledImageSet,
    train_set: LabeledImageSet,
    model: SmallConvNet,
) -> list[NeighborResult]:
    """Nearest training image for every synthetic image."""
    if len(train_set) == 0:
        raise ValueError("training fold is empty")
    order = np.argsort([r.image_id for r in train_set.records], kind="mergesort")
    train_ids = [train_set.records[i].image_id for i in order]
    train_pix = train_set.pixel_array()[order]
    train_emb = final_layer_embedding(model, train_pix)
    syn_emb = final_layer_embedding(model, syn_set.pixel_array())
    dist = cosine_distances(syn_emb, train_emb)
    best = dist.argmin(axis=1)  # first occurrence wins -> smallest train_id
    return [
        NeighborResult(syn_id=rec.image_id, train_id=train_ids[best[i]],
                       distance=float(dist[i, best[i]]))
        for i, rec in enumerate(syn_set.records)
    ]


def nearest_neighbor(
    syn_image: np.ndarray,
    train_set: LabeledImageSet,
    model: SmallConvNet,
    syn_id: str = "query",
) -> NeighborResult:
    query = LabeledImageSet(labels=list(train_set.labels))
    from ..data.records import ImageRecord

    query.records = [ImageRecord(syn_id, "query", np.asarray(syn_image, dtype=np.float32),
                                 np.zeros(len(train_set.labels), dtype=np.uint8))]
    return nn_audit(query, train_set, model)[0]
