"""Per-label AUROC aggregation and the derived benchmark scores.

AUROC is computed with the rank statistic (ties contribute 1/2). Labels that
are constant in a fold have no defined AUROC; they are excluded from the mean
and reported explicitly.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .fid import MetricError


def _average_ranks(x: np.ndarray) -> np.ndarray:
    """Midranks (1-based), ties averaged."""
    order = np.argsort(x, kind="mergesort")
    ranks = np.empty(len(x), dtype=np.float64)
    sx = x[order]
    i = 0
    while i < len(x):
        j = i
        while j + 1 < len(x) and sx[j + 1] == sx[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def auroc(scores: np.ndarray, labels: np.ndarray) -> float | None:
    """Rank-statistic AUROC for one label; None when the label is constant."""
    labels = np.asarray(labels).astype(bool)
    scores = np.asarray(scores, dtype=np.float64)
    n_pos = int(labels.sum())
    n_neg = int(len(labels) - n_pos)
    if n_pos == 0 or n_neg == 0:
        return None
    ranks = _average_ranks(scores)
    pos_rank_sum = float(ranks[labels].sum())
    return (pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


@dataclass
class AucReport:
    per_label: dict[str, float | None]
    mean_auc: float
    n_eval: int
    undefined: list[str] = field(default_factory=list)

    def defined_labels(self) -> list[str]:
        return [k for k, v in self.per_label.items() if v is not None]


def mean_auc(scores: np.ndarray, labels: np.ndarray, label_names: list[str]) -> AucReport:
    """AucReport over an (n, m) score matrix against (n, m) binary labels."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape:
        raise MetricError(f"score shape {scores.shape} != label shape {labels.shape}")
    if scores.shape[1] != len(label_names):
        raise MetricError(f"{scores.shape[1]} score columns for {len(label_names)} labels")
    if not np.isfinite(scores).all():
        raise MetricError("scores contain non-finite values")

    per_label: dict[str, float | None] = {}
    undefined: list[str] = []
    for j, name in enumerate(label_names):
        value = auroc(scores[:, j], labels[:, j])
        per_label[name] = value
        if value is None:
            undefined.append(name)
    defined = [v for v in per_label.values() if v is not None]
    if not defined:
        raise MetricError("every label is constant in this fold")
    if undefined:
        warnings.warn(f"labels constant in fold, excluded from mean: {undefined}")
    return AucReport(
        per_label=per_label,
        mean_auc=float(np.mean(defined)),
        n_eval=int(scores.shape[0]),
        undefined=undefined,
    )


def _check_same_labels(a: AucReport, b: AucReport) -> None:
    if list(a.per_label) != list(b.per_label):
        raise MetricError("reports cover different label sets")


def benchmark_delta(auc_real: AucReport, auc_syn: AucReport) -> float:
    """Headline benchmark score: mean AUC on reals minus mean AUC on synthetics."""
    _check_same_labels(auc_real, auc_syn)
    return auc_real.mean_auc - auc_syn.mean_auc


def delta_syn(auc_on_syn: AucReport, auc_on_real: AucReport) -> float:
    """Label-overfitting diagnostic for a model trained on synthetic data:
    its mean AUC on synthetic test images minus on real test images. Values
    far above zero flag unrealistic label encoding."""
    _check_same_labels(auc_on_syn, auc_on_real)
    return auc_on_syn.mean_auc - auc_on_real.mean_auc
