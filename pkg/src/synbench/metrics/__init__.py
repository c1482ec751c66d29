from .auroc import AucReport, auroc, benchmark_delta, delta_syn, mean_auc
from .embedder import TorchEmbedder, load_embedder, save_embedder, train_embedder
from .fid import Embedder, EmbeddingStats, MetricError, compute_fid, frechet_distance, gaussian_stats

__all__ = [
    "AucReport",
    "Embedder",
    "EmbeddingStats",
    "MetricError",
    "TorchEmbedder",
    "auroc",
    "benchmark_delta",
    "compute_fid",
    "delta_syn",
    "frechet_distance",
    "gaussian_stats",
    "load_embedder",
    "mean_auc",
    "save_embedder",
    "train_embedder",
]
