"""Wasserstein losses with gradient penalty, plus the auxiliary-classifier
label terms used by the progressive model."""

from __future__ import annotations

from dataclasses import dataclass

import torch
import torch.nn.functional as F


class TrainingError(RuntimeError):
    pass


def gradient_penalty(
    score_fn,
    x_real: torch.Tensor,
    x_fake: torch.Tensor,
    y: torch.Tensor | None,
    gp_lambda: float,
    generator: torch.Generator | None = None,
) -> torch.Tensor:
    """lambda * E[(||grad_xhat D(xhat, y)||_2 - 1)^2] on per-sample uniform
    mixtures of real and fake inputs."""
    if x_real.shape != x_fake.shape:
        raise TrainingError(f"shape mismatch {tuple(x_real.shape)} vs {tuple(x_fake.shape)}")
    u = torch.rand(x_real.shape[0], 1, 1, 1, generator=generator, dtype=x_real.dtype)
    x_hat = (u * x_real + (1.0 - u) * x_fake).detach().requires_grad_(True)
    scores = score_fn(x_hat, y)
    grads = torch.autograd.grad(scores.sum(), x_hat, create_graph=True)[0]
    norms = grads.flatten(1).norm(2, dim=1)
    return gp_lambda * ((norms - 1.0) ** 2).mean()


def softmax_label_ce(logits: torch.Tensor, y: torch.Tensor) -> torch.Tensor:
    """Softmax cross-entropy against multi-hot labels normalized to unit mass.
    Rows without any positive bit carry no label information and contribute 0."""
    mass = y.sum(dim=1)
    valid = mass > 0
    if not valid.any():
        return logits.sum() * 0.0
    target = y[valid] / mass[valid].unsqueeze(1)
    logp = F.log_softmax(logits[valid], dim=1)
    return -(target * logp).sum(dim=1).mean()


@dataclass
class AuxTerms:
    """Auxiliary-classifier label losses (auxiliary conditioning only)."""

    ce_real: torch.Tensor
    ce_fake: torch.Tensor


def adversarial_losses(
    d_real: torch.Tensor,
    d_fake: torch.Tensor,
    gp: torch.Tensor | float,
    aux_terms: AuxTerms | None = None,
    conditioning: str = "projection",
) -> tuple[torch.Tensor, torch.Tensor]:
    """(loss_d, loss_g) for one step.

    loss_d = E[d_fake] - E[d_real] + gp, loss_g = -E[d_fake]; auxiliary
    conditioning adds the label cross-entropy on reals and fakes to the
    discriminator and on fakes to the generator.
    """
    if conditioning == "projection" and aux_terms is not None:
        raise TrainingError("projection conditioning takes no auxiliary label terms")
    mean_real = d_real.mean()
    mean_fake = d_fake.mean()
    loss_d = mean_fake - mean_real + gp
    loss_g = -mean_fake
    if aux_terms is not None:
        loss_d = loss_d + aux_terms.ce_real + aux_terms.ce_fake
        loss_g = loss_g + aux_terms.ce_fake
    return loss_d, loss_g
