"""Predictive-model training and evaluation under the benchmark protocol."""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from torch import nn

from ..data.records import LabeledImageSet
from ..metrics.auroc import AucReport, benchmark_delta, delta_syn, mean_auc
from ..nets import SmallConvNet, batched_apply, to_batch_tensor
from .protocol import IMPROVEMENT_EPS, ClassifierProtocol, ProtocolError, TrainHistory


def train_classifier(
    train_fold: LabeledImageSet,
    val_fold: LabeledImageSet,
    protocol: ClassifierProtocol,
) -> tuple[SmallConvNet, TrainHistory]:
    """Fit the compact backbone with per-label sigmoid BCE; returns the model
    restored to its best-validation epoch plus the epoch history."""
    if len(train_fold) == 0:
        raise ProtocolError("training fold is empty")
    if train_fold.labels != val_fold.labels:
        raise ProtocolError("train and val folds use different label spaces")

    torch.manual_seed(protocol.seed)
    model = SmallConvNet(len(train_fold.labels), width=protocol.backbone_width)
    opt = torch.optim.Adam(model.parameters(), lr=protocol.lr0)
    loss_fn = nn.BCEWithLogitsLoss()

    images = train_fold.pixel_array()
    labels = torch.from_numpy(train_fold.label_array().astype(np.float32))
    per_epoch = min(len(images), protocol.epoch_cap_images)
    rng = np.random.default_rng(protocol.seed)

    history = TrainHistory()
    lr = protocol.lr0
    best_state = {k: v.clone() for k, v in model.state_dict().items()}
    lr_bad = 0
    stop_bad = 0

    for epoch in range(1, protocol.max_epochs + 1):
        order = rng.permutation(len(images))[:per_epoch]
        model.train()
        for start in range(0, per_epoch, protocol.batch_size):
            idx = order[start : start + protocol.batch_size]
            x = to_batch_tensor(images[idx])
            opt.zero_grad()
            loss = loss_fn(model(x), labels[idx])
            loss.backward()
            opt.step()

        val_auc = evaluate(model, val_fold).mean_auc
        history.record(epoch, lr, val_auc)

        if val_auc > history.best_val_auc + IMPROVEMENT_EPS or epoch == 1:
            history.best_val_auc = val_auc
            history.best_epoch = epoch
            best_state = {k: v.clone() for k, v in model.state_dict().items()}
            lr_bad = 0
            stop_bad = 0
        else:
            lr_bad += 1
            stop_bad += 1
            if lr_bad >= protocol.lr_patience:
                lr *= protocol.lr_factor
                for group in opt.param_groups:
                    group["lr"] = lr
                lr_bad = 0
            if stop_bad >= protocol.stop_patience:
                break

    history.stopped_epoch = history.rows[-1][0]
    model.load_state_dict(best_state)
    model.eval()
    return model, history


def evaluate(model: SmallConvNet, fold: LabeledImageSet) -> AucReport:
    """Deterministic forward pass over a fold -> per-label AUROC report."""
    if len(fold) == 0:
        raise ProtocolError("evaluation fold is empty")
    if len(fold.labels) != model.n_labels:
        raise ProtocolError(
            f"fold has {len(fold.labels)} labels, model expects {model.n_labels}"
        )
    model.eval()
    scores = batched_apply(lambda x: torch.sigmoid(model(x)), fold.pixel_array())
    return mean_auc(scores, fold.label_array(), fold.labels)


@dataclass
class PairResult:
    seed: int
    auc_real: AucReport
    auc_syn: AucReport
    delta: float
    delta_syn: float | None = None


def run_pair(
    real_train: LabeledImageSet,
    real_val: LabeledImageSet,
    real_test: LabeledImageSet,
    syn_train: LabeledImageSet,
    syn_val: LabeledImageSet,
    protocol: ClassifierProtocol,
    seeds: list[int],
    syn_test: LabeledImageSet | None = None,
) -> list[PairResult]:
    """Train one classifier on reals and one on synthetics per seed; evaluate
    both on the real test fold. When a synthetic test fold is supplied, the
    label-overfitting diagnostic is computed for the synthetic model as well."""
    if len(syn_train) != len(real_train):
        warnings.warn(
            f"fold sizes differ (real {len(real_train)} vs synthetic {len(syn_train)})"
        )
    results = []
    for seed in seeds:
        proto = ClassifierProtocol(**{**protocol.__dict__, "seed": seed})
        model_real, _ = train_classifier(real_train, real_val, proto)
        model_syn, _ = train_classifier(syn_train, syn_val, proto)
        auc_real = evaluate(model_real, real_test)
        auc_syn = evaluate(model_syn, real_test)
        ds = None
        if syn_test is not None:
            ds = delta_syn(evaluate(model_syn, syn_test), auc_syn)
        results.append(
            PairResult(
                seed=seed,
                auc_real=auc_real,
                auc_syn=auc_syn,
                delta=benchmark_delta(auc_real, auc_syn),
                delta_syn=ds,
            )
        )
    return results


def write_history(path: str | Path, history: TrainHistory) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "lr", "val_mean_auc"])
        for epoch, lr, auc in history.rows:
            writer.writerow([epoch, f"{lr:.8f}", f"{auc:.6f}"])
