"""Synthetic fold generation: one image per real label row, fresh noise each."""

from __future__ import annotations

import warnings

import numpy as np
import torch

from ..data.records import ImageRecord, LabeledImageSet, combo_key
from ..models.checkpoint import GanCheckpoint
from ..models.generator import Generator


def synthesize_fold(
    generator: Generator | GanCheckpoint,
    label_source: LabeledImageSet | np.ndarray,
    seed: int,
    id_prefix: str = "syn",
    batch_size: int = 128,
) -> LabeledImageSet:
    """Mirror a fold's exact label multiset with synthetic images.

    `label_source` is the real fold (or a raw (n, m) bit matrix); the output
    keeps the row order, so the label multiset matches exactly. Every record
    gets its own synthetic patient id: no real patient stands behind an image.
    """
    if isinstance(generator, GanCheckpoint):
        generator = generator.build_generator()
    topology = generator.topology

    if isinstance(label_source, LabeledImageSet):
        label_names = list(label_source.labels)
        labels = label_source.label_array() if len(label_source) else np.zeros((0, len(label_names)), dtype=np.uint8)
    else:
        labels = np.asarray(label_source, dtype=np.uint8).reshape(-1, topology.label_dim) \
            if np.asarray(label_source).size else np.zeros((0, topology.label_dim), dtype=np.uint8)
        label_names = [f"label_{i}" for i in range(topology.label_dim)]

    if len(label_names) != topology.label_dim:
        raise ValueError(
            f"label width {len(label_names)} != generator label space {topology.label_dim}"
        )

    records: list[ImageRecord] = []
    if len(labels):
        gen = torch.Generator().manual_seed(seed)
        y_all = torch.from_numpy(labels.astype(np.float32))
        generator.eval()
        with torch.no_grad():
            for start in range(0, len(labels), batch_size):
                y = y_all[start : start + batch_size]
                z = torch.randn(len(y), topology.latent_dim, generator=gen)
                img = generator(z, y)
                pixels = ((img + 1.0) / 2.0).clamp(0, 1).squeeze(1).numpy()
                for k in range(len(y)):
                    idx = start + k
                    pid = f"{id_prefix}-{idx:06d}"
                    records.append(
                        ImageRecord(f"{pid}-img", pid, pixels[k].astype(np.float32), labels[idx])
                    )

    return LabeledImageSet(labels=label_names, records=records)


def check_label_space(fold: LabeledImageSet, train_combos: set[str]) -> None:
    """Warn when a requested combo never occurred in GAN training; the
    generator gives no guarantee outside its training label space."""
    unseen = {combo_key(r.bits) for r in fold.records} - train_combos
    if unseen:
        warnings.warn(f"labels outside the training label space: {sorted(unseen)}")
