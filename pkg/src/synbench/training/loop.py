"""Adversarial training with the convergence-based stopping rule.

Training alternates n_critic discriminator updates with one generator update
under Adam. Once the discriminator has seen `min_images` reals, the distance
between real and synthetic embedding distributions is evaluated every
`fid_interval` reals; when it fails to improve for `fid_patience` consecutive
evaluations, training stops. The progressive model walks the resolution ladder
first (linear fade-in, then a stabilization phase of equal length per level).

Repetitions with fresh seeds stop at the image count where the first seed
stopped, so their histories stay comparable.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterator

import numpy as np
import torch
import torch.nn.functional as F

from ..data.records import LabeledImageSet
from ..metrics.fid import Embedder, compute_fid
from ..models.checkpoint import GanCheckpoint, checkpoint_from_models
from ..models.discriminator import Discriminator
from ..models.generator import Generator
from ..models.topology import NetworkTopology
from .losses import AuxTerms, TrainingError, adversarial_losses, gradient_penalty, softmax_label_ce


@dataclass
class TrainSchedule:
    batch_size: int = 64
    lr_g: float = 0.002
    lr_d: float = 0.002
    n_critic: int = 1
    phase_images: int = 60_000
    min_images: int = 300_000
    fid_interval: int = 30_000
    fid_patience: int = 2
    gp_lambda: float = 10.0
    adam_betas: tuple[float, float] = (0.0, 0.99)
    fid_n: int = 2048
    seed: int = 1
    max_images: int = 0  # 0 -> 10 * min_images safety cap

    def __post_init__(self) -> None:
        for name in ("batch_size", "n_critic", "phase_images", "min_images",
                     "fid_interval", "fid_patience", "fid_n"):
            if getattr(self, name) <= 0:
                raise TrainingError(f"{name} must be positive")
        if self.lr_g <= 0 or self.lr_d <= 0 or self.gp_lambda < 0:
            raise TrainingError("learning rates must be positive and gp_lambda non-negative")
        if self.fid_interval > self.min_images:
            raise TrainingError("fid_interval must not exceed min_images")
        if self.max_images == 0:
            self.max_images = 10 * self.min_images


def desk_schedule(**overrides) -> TrainSchedule:
    """Desk-scale defaults; every rule matches the full-scale protocol, only
    the magnitudes shrink."""
    return TrainSchedule(**overrides)


def full_scale_schedule(**overrides) -> TrainSchedule:
    """Full-scale magnitudes (32px row): batch 256, lr 0.005, minimum 7M reals
    with 1.4M-image progressive phases, evaluations every 400k reals over
    10,000 samples."""
    base = dict(
        batch_size=256,
        lr_g=0.005,
        lr_d=0.005,
        n_critic=1,
        phase_images=1_400_000,
        min_images=7_000_000,
        fid_interval=400_000,
        fid_n=10_000,
    )
    base.update(overrides)
    return TrainSchedule(**base)


def should_stop(fid_history: list[tuple[int, float]], min_images: int, patience: int = 2) -> bool:
    """True once some evaluation at or past min_images completes `patience`
    consecutive non-improvements over the best earlier value.

    Monotone in history extension: once a prefix stops, the call stays true.
    """
    fids = [f for _, f in fid_history]
    seen = [s for s, _ in fid_history]
    for i in range(len(fids)):
        if seen[i] < min_images or i < patience:
            continue
        best_before = min(fids[: i - patience + 1])
        window = fids[i - patience + 1 : i + 1]
        if all(f >= best_before for f in window):
            return True
    return False


@dataclass
class _PhasePoint:
    resolution: int
    alpha: float


def progressive_phase(topology: NetworkTopology, schedule: TrainSchedule, images_seen: int) -> _PhasePoint:
    """Resolution and fade coefficient after `images_seen` reals.

    Phase order: stabilize at the base resolution, then for each higher level
    a linear-fade transition followed by a stabilization of equal length.
    """
    if topology.generator_wiring != "progressive":
        return _PhasePoint(topology.target_resolution, 1.0)
    ladder = topology.resolutions()
    phases: list[tuple[int, bool]] = [(ladder[0], False)]
    for r in ladder[1:]:
        phases.append((r, True))
        phases.append((r, False))
    idx = images_seen // schedule.phase_images
    if idx >= len(phases):
        return _PhasePoint(topology.target_resolution, 1.0)
    res, fading = phases[idx]
    if not fading:
        return _PhasePoint(res, 1.0)
    progress = (images_seen % schedule.phase_images) / schedule.phase_images
    return _PhasePoint(res, float(progress))


class GanDivergenceError(TrainingError):
    pass


def _downsample_to(x: torch.Tensor, side: int) -> torch.Tensor:
    factor = x.shape[-1] // side
    if factor == 1:
        return x
    return F.avg_pool2d(x, kernel_size=factor)


def _upsample_to(x: torch.Tensor, side: int) -> torch.Tensor:
    if x.shape[-1] == side:
        return x
    return F.interpolate(x, size=(side, side), mode="nearest")


class GanTrainer:
    """Owns one generator/discriminator pair for the duration of a run."""

    def __init__(
        self,
        train_set: LabeledImageSet,
        topology: NetworkTopology,
        schedule: TrainSchedule,
        embedder: Embedder,
    ):
        if len(train_set) == 0:
            raise TrainingError("training fold is empty")
        if train_set.side != topology.target_resolution:
            raise TrainingError(
                f"data side {train_set.side} != topology target {topology.target_resolution}"
            )
        self.topology = topology
        self.schedule = schedule
        self.embedder = embedder
        self.aux = topology.conditioning == "auxiliary"

        torch.manual_seed(schedule.seed)
        self.generator = Generator(topology)
        self.discriminator = Discriminator(topology)
        self.opt_g = torch.optim.Adam(self.generator.parameters(), lr=schedule.lr_g,
                                      betas=schedule.adam_betas)
        self.opt_d = torch.optim.Adam(self.discriminator.parameters(), lr=schedule.lr_d,
                                      betas=schedule.adam_betas)

        # pixels live in [-1, 1] inside the adversarial game
        self.images01 = train_set.pixel_array()
        self.reals = torch.from_numpy(self.images01 * 2.0 - 1.0).unsqueeze(1)
        self.labels = torch.from_numpy(train_set.label_array().astype(np.float32))
        self.batch_rng = np.random.default_rng(schedule.seed)
        self.torch_rng = torch.Generator().manual_seed(schedule.seed + 1)

        self.images_seen = 0
        self.fid_history: list[tuple[int, float]] = []
        self.g_steps = 0
        self.d_steps = 0

    # ------------------------------------------------------------- batches

    def _batch(self, size: int) -> tuple[torch.Tensor, torch.Tensor]:
        idx = self.batch_rng.integers(0, len(self.reals), size=size)
        return self.reals[idx], self.labels[idx]

    def _latent(self, size: int) -> torch.Tensor:
        return torch.randn(size, self.topology.latent_dim, generator=self.torch_rng)

    # ---------------------------------------------------------------- steps

    def _d_step(self, phase: _PhasePoint) -> float:
        x_real, y = self._batch(self.schedule.batch_size)
        x_real = _downsample_to(x_real, phase.resolution)
        z = self._latent(self.schedule.batch_size)
        with torch.no_grad():
            x_fake = self.generator(z, y, alpha=phase.alpha, resolution=phase.resolution)

        d_real, logits_real = self.discriminator(x_real, y, alpha=phase.alpha,
                                                 resolution=phase.resolution)
        d_fake, logits_fake = self.discriminator(x_fake, y, alpha=phase.alpha,
                                                 resolution=phase.resolution)
        gp = gradient_penalty(
            lambda x, yy: self.discriminator(x, yy, alpha=phase.alpha,
                                             resolution=phase.resolution)[0],
            x_real, x_fake, y, self.schedule.gp_lambda, generator=self.torch_rng,
        )
        aux = None
        if self.aux:
            aux = AuxTerms(ce_real=softmax_label_ce(logits_real, y),
                           ce_fake=softmax_label_ce(logits_fake, y))
        loss_d, _ = adversarial_losses(d_real, d_fake, gp, aux,
                                       conditioning=self.topology.conditioning)
        if not torch.isfinite(loss_d):
            raise GanDivergenceError(f"non-finite discriminator loss at {self.images_seen} images")
        self.opt_d.zero_grad()
        loss_d.backward()
        self.opt_d.step()
        self.d_steps += 1
        self.images_seen += self.schedule.batch_size
        return float(loss_d.detach())

    def _g_step(self, phase: _PhasePoint) -> float:
        _, y = self._batch(self.schedule.batch_size)
        z = self._latent(self.schedule.batch_size)
        x_fake = self.generator(z, y, alpha=phase.alpha, resolution=phase.resolution)
        d_fake, logits_fake = self.discriminator(x_fake, y, alpha=phase.alpha,
                                                 resolution=phase.resolution)
        loss_g = -d_fake.mean()
        if self.aux:
            loss_g = loss_g + softmax_label_ce(logits_fake, y)
        self.opt_g.zero_grad()
        loss_g.backward()
        self.opt_g.step()
        self.g_steps += 1
        return float(loss_g.detach())

    # ------------------------------------------------------------------ FID

    def synthesize(self, n: int, rng_key: int, batch: int = 128) -> np.ndarray:
        """n synthetic images in [0, 1]: labels cycle the train fold in
        manifest order, noise is fresh per image."""
        gen = torch.Generator().manual_seed((self.schedule.seed << 20) ^ rng_key)
        reps = math.ceil(n / len(self.labels))
        labels = self.labels.repeat(reps, 1)[:n]
        out = []
        self.generator.eval()
        with torch.no_grad():
            for start in range(0, n, batch):
                y = labels[start : start + batch]
                z = torch.randn(len(y), self.topology.latent_dim, generator=gen)
                img = self.generator(z, y)
                out.append(((img + 1.0) / 2.0).clamp(0, 1).squeeze(1).numpy())
        self.generator.train()
        return np.concatenate(out, axis=0)

    def evaluate_fid(self) -> float:
        syn = self.synthesize(self.schedule.fid_n, rng_key=self.images_seen)
        return compute_fid(self.images01, syn, self.embedder, self.schedule.fid_n)

    def checkpoint(self, stopped_at: int | None = None) -> GanCheckpoint:
        return checkpoint_from_models(self.topology, self.generator, self.discriminator,
                                      self.images_seen, self.fid_history, stopped_at)


def train_gan(
    train_set: LabeledImageSet,
    topology: NetworkTopology,
    schedule: TrainSchedule,
    embedder: Embedder,
    fixed_budget: int | None = None,
) -> Iterator[GanCheckpoint]:
    """Run the adversarial game, yielding a checkpoint at every FID
    evaluation; the final checkpoint carries `stopped_at`.

    With `fixed_budget` the convergence rule is bypassed and training stops
    exactly at that image count (used by repetitions 2..n).
    """
    trainer = GanTrainer(train_set, topology, schedule, embedder)
    sched = schedule
    next_eval = sched.min_images if fixed_budget is None else min(sched.min_images, fixed_budget)
    hard_cap = fixed_budget if fixed_budget is not None else sched.max_images

    while True:
        phase = progressive_phase(topology, sched, trainer.images_seen)
        for _ in range(sched.n_critic):
            trainer._d_step(phase)
        trainer._g_step(phase)

        if trainer.images_seen >= next_eval:
            fid = trainer.evaluate_fid()
            trainer.fid_history.append((trainer.images_seen, fid))
            next_eval = trainer.images_seen + sched.fid_interval
            if fixed_budget is not None:
                next_eval = min(next_eval, fixed_budget)
            done_budget = fixed_budget is not None and trainer.images_seen >= fixed_budget
            done_rule = fixed_budget is None and should_stop(
                trainer.fid_history, sched.min_images, sched.fid_patience
            )
            done_cap = trainer.images_seen >= hard_cap
            if done_budget or done_rule or done_cap:
                yield trainer.checkpoint(stopped_at=trainer.images_seen)
                return
            yield trainer.checkpoint()


def run_to_completion(*args, **kwargs) -> GanCheckpoint:
    """Consume train_gan and return the final (stopped) checkpoint."""
    last = None
    for ckpt in train_gan(*args, **kwargs):
        last = ckpt
    assert last is not None and last.stopped_at is not None
    return last


def run_repetitions(
    train_set: LabeledImageSet,
    topology: NetworkTopology,
    schedule: TrainSchedule,
    embedder: Embedder,
    n_seeds: int,
) -> list[GanCheckpoint]:
    """Seeds 1..n trained independently; seeds 2..n stop at the image count
    where seed 1 stopped."""
    if n_seeds < 1:
        raise TrainingError("n_seeds must be >= 1")
    first = run_to_completion(train_set, topology, replace(schedule, seed=schedule.seed),
                              embedder)
    results = [first]
    for k in range(1, n_seeds):
        rep_schedule = replace(schedule, seed=schedule.seed + k)
        results.append(
            run_to_completion(train_set, topology, rep_schedule, embedder,
                              fixed_budget=first.stopped_at)
        )
    return results


def write_fid_history(path: str | Path, history: list[tuple[int, float]]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["images_seen", "fid"])
        for seen, fid in history:
            writer.writerow([seen, f"{fid:.6f}"])
