"""Training protocol for the predictive model.

Epochs iterate at most `epoch_cap_images` images; validation mean AUC drives
both the plateau learning-rate decay and early stopping, with independent
patience counters. An epoch only counts as an improvement when it beats the
best score by more than a small dead band, so float jitter cannot keep
training alive.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class ProtocolError(ValueError):
    pass


IMPROVEMENT_EPS = 1e-4


@dataclass
class ClassifierProtocol:
    backbone_width: int = 16
    epoch_cap_images: int = 5000
    batch_size: int = 48
    lr0: float = 1e-4
    lr_factor: float = 0.1
    lr_patience: int = 2
    stop_patience: int = 3
    max_epochs: int = 60
    seed: int = 0

    def __post_init__(self) -> None:
        if self.lr_patience < 1 or self.stop_patience < 1:
            raise ProtocolError("patience values must be >= 1")
        if not 0.0 < self.lr_factor < 1.0:
            raise ProtocolError("lr_factor must lie in (0, 1)")
        if min(self.epoch_cap_images, self.batch_size, self.max_epochs) <= 0 or self.lr0 <= 0:
            raise ProtocolError("epoch cap, batch size, max epochs and lr0 must be positive")


def desk_protocol(**overrides) -> ClassifierProtocol:
    return ClassifierProtocol(**overrides)


@dataclass
class TrainHistory:
    rows: list[tuple[int, float, float]] = field(default_factory=list)  # (epoch, lr, val_mean_auc)
    stopped_epoch: int = 0
    best_epoch: int = 0
    best_val_auc: float = 0.0

    def record(self, epoch: int, lr: float, val_auc: float) -> None:
        if self.rows and lr > self.rows[-1][1]:
            raise ProtocolError("learning rate must be non-increasing")
        self.rows.append((epoch, lr, val_auc))
