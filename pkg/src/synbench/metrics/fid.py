"""Fréchet distance between Gaussian fits of image-embedding distributions.

The score between two embedded sets with means m, m_w and covariances C, C_w is

    d^2 = ||m - m_w||^2 + Tr(C + C_w - 2 (C C_w)^{1/2})

computed in double precision. The matrix root of the product is taken through
the symmetrized form B = C^{1/2} C_w C^{1/2}, which is PSD by construction, so
Tr((C C_w)^{1/2}) = Tr(B^{1/2}) stays real; tiny negative eigenvalues from
rounding are clipped to zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class MetricError(ValueError):
    pass


PSD_TOLERANCE = -1e-6


@dataclass
class EmbeddingStats:
    m: np.ndarray  # mean vector
    C: np.ndarray  # population covariance, symmetric PSD
    n: int

    def __post_init__(self) -> None:
        self.m = np.asarray(self.m, dtype=np.float64)
        self.C = np.asarray(self.C, dtype=np.float64)
        if self.n < 2:
            raise MetricError(f"need at least 2 samples, got {self.n}")
        if self.C.shape != (self.dim, self.dim):
            raise MetricError(f"covariance shape {self.C.shape} != ({self.dim}, {self.dim})")
        if np.abs(self.C - self.C.T).max() > 1e-8:
            raise MetricError("covariance is not symmetric within 1e-8")

    @property
    def dim(self) -> int:
        return int(self.m.shape[0])


def gaussian_stats(embeddings: np.ndarray) -> EmbeddingStats:
    """Column mean and population covariance (divide by n) of an n x d matrix."""
    x = np.asarray(embeddings, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise MetricError(f"need an (n>=2, d) matrix, got shape {x.shape}")
    m = x.mean(axis=0)
    centered = x - m
    C = centered.T @ centered / x.shape[0]
    C = (C + C.T) / 2.0
    return EmbeddingStats(m=m, C=C, n=x.shape[0])


def _psd_eigh(C: np.ndarray, what: str) -> tuple[np.ndarray, np.ndarray]:
    vals, vecs = np.linalg.eigh(C)
    if vals.min() < PSD_TOLERANCE:
        raise MetricError(f"{what} is not PSD within tolerance (min eigenvalue {vals.min():.3e})")
    return np.clip(vals, 0.0, None), vecs


def frechet_distance(s1: EmbeddingStats, s2: EmbeddingStats) -> float:
    """Squared Fréchet distance between two Gaussian summaries."""
    if s1.dim != s2.dim:
        raise MetricError(f"dimension mismatch: {s1.dim} vs {s2.dim}")
    diff = s1.m - s2.m
    vals1, vecs1 = _psd_eigh(s1.C, "first covariance")
    _psd_eigh(s2.C, "second covariance")

    root1 = vecs1 * np.sqrt(vals1) @ vecs1.T
    B = root1 @ s2.C @ root1
    B = (B + B.T) / 2.0
    bvals = np.clip(np.linalg.eigvalsh(B), 0.0, None)
    trace_root = float(np.sqrt(bvals).sum())

    d2 = float(diff @ diff + np.trace(s1.C) + np.trace(s2.C) - 2.0 * trace_root)
    return max(d2, 0.0)


class Embedder:
    """Interface of an image embedder: (n, side, side) pixels in [0,1] -> (n, dim)."""

    dim: int

    def embed(self, images: np.ndarray) -> np.ndarray:  # pragma: no cover - interface
        raise NotImplementedError


def _cycle_to(images: np.ndarray, n: int) -> np.ndarray:
    """First n images, wrapping around in given order when the set is smaller."""
    reps = int(np.ceil(n / images.shape[0]))
    return np.concatenate([images] * reps, axis=0)[:n]


def compute_fid(
    real_images: np.ndarray,
    syn_images: np.ndarray,
    embedder: Embedder,
    n: int,
) -> float:
    """FID over exactly n reals (manifest order, wrap-around) and n synthetics.

    The sample size is part of the metric: FID is biased with respect to n, so
    comparisons must hold it constant.
    """
    if n < 2:
        raise MetricError(f"n must be >= 2, got {n}")
    real_images = np.asarray(real_images)
    syn_images = np.asarray(syn_images)
    if real_images.shape[0] == 0 or syn_images.shape[0] == 0:
        raise MetricError("both image sets must be non-empty")
    if syn_images.shape[0] < n:
        raise MetricError(
            f"need at least n={n} synthetic images (fresh draws), got {syn_images.shape[0]}"
        )
    real_emb = embedder.embed(_cycle_to(real_images, n))
    syn_emb = embedder.embed(syn_images[:n])
    for name, emb in (("real", real_emb), ("synthetic", syn_emb)):
        if not np.isfinite(emb).all():
            raise MetricError(f"embedder produced non-finite values on {name} images")
    return frechet_distance(gaussian_stats(syn_emb), gaussian_stats(real_emb))
