"""Building blocks shared by both GAN architectures.

All trainable weights are stored with unit variance and rescaled at every use
by sqrt(2 / fan_in) (equalized learning rate). Feature maps inside the
generator are normalized per pixel across channels; the conditional variant
modulates the normalized features with a scale and bias computed affinely from
the concatenated noise and label vector:

    b_i = a_i / sqrt(mean_j a_j^2 + eps) * gamma_i + beta_i
    gamma = W1 [z; y] + b1,   beta = W2 [z; y] + b2
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import torch
import torch.nn.functional as F
from torch import nn

PIXEL_NORM_EPS = 1e-8
LEAKY_SLOPE = 0.2


class ModelError(ValueError):
    pass


def equalized_scale(fan_in: int) -> float:
    """Runtime weight multiplier sqrt(2 / fan_in)."""
    if fan_in <= 0:
        raise ModelError(f"fan_in must be positive, got {fan_in}")
    return math.sqrt(2.0 / fan_in)


class EqualizedLinear(nn.Module):
    def __init__(self, in_features: int, out_features: int, bias_init: float = 0.0):
        super().__init__()
        self.weight = nn.Parameter(torch.randn(out_features, in_features))
        self.bias = nn.Parameter(torch.full((out_features,), float(bias_init)))
        self.scale = equalized_scale(in_features)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return F.linear(x, self.weight * self.scale, self.bias)


class EqualizedConv2d(nn.Module):
    def __init__(self, in_channels: int, out_channels: int, kernel_size: int, padding: int = 0):
        super().__init__()
        self.weight = nn.Parameter(torch.randn(out_channels, in_channels, kernel_size, kernel_size))
        self.bias = nn.Parameter(torch.zeros(out_channels))
        self.scale = equalized_scale(in_channels * kernel_size * kernel_size)
        self.padding = padding

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return F.conv2d(x, self.weight * self.scale, self.bias, padding=self.padding)


def pixel_norm(x: torch.Tensor, eps: float = PIXEL_NORM_EPS, dim: int = 1) -> torch.Tensor:
    """Normalize each pixel's channel vector to unit mean square."""
    return x * torch.rsqrt(x.pow(2).mean(dim=dim, keepdim=True) + eps)


@dataclass
class NormalizationParams:
    """Effective affine maps from [z; y] to per-channel scale and bias."""

    W1: torch.Tensor  # (channels, cond_dim)
    b1: torch.Tensor  # (channels,)
    W2: torch.Tensor
    b2: torch.Tensor
    eps: float = PIXEL_NORM_EPS


def conditional_pixel_norm(
    features: torch.Tensor,
    z: torch.Tensor,
    y: torch.Tensor,
    params: NormalizationParams,
    dim: int = 1,
) -> torch.Tensor:
    """Functional form of the conditional normalization (see module docstring).

    `features` is (..., C, ...) with channels on `dim`; z and y are single
    vectors or batches matching the leading dimension.
    """
    cond = torch.cat([z, y], dim=-1)
    if params.W1.shape[-1] != cond.shape[-1] or params.W2.shape[-1] != cond.shape[-1]:
        raise ModelError(
            f"affine maps expect cond width {params.W1.shape[-1]}, got {cond.shape[-1]}"
        )
    if params.W1.shape[0] != features.shape[dim] or params.W2.shape[0] != features.shape[dim]:
        raise ModelError(
            f"scale length {params.W1.shape[0]} != channel count {features.shape[dim]}"
        )
    gamma = cond @ params.W1.T + params.b1
    beta = cond @ params.W2.T + params.b2
    normed = pixel_norm(features, eps=params.eps, dim=dim)
    # Broadcast (B, C) over trailing spatial dims.
    shape = [1] * features.ndim
    shape[dim] = features.shape[dim]
    if gamma.ndim == 2:
        shape[0] = gamma.shape[0]
    return normed * gamma.view(shape) + beta.view(shape)


class ConditionalPixelNorm(nn.Module):
    """Trainable conditional pixel norm; reduces to pixel_norm at init mean
    (gamma bias starts at 1, beta bias at 0)."""

    def __init__(self, cond_dim: int, channels: int):
        super().__init__()
        self.to_gamma = EqualizedLinear(cond_dim, channels, bias_init=1.0)
        self.to_beta = EqualizedLinear(cond_dim, channels, bias_init=0.0)

    def forward(self, x: torch.Tensor, cond: torch.Tensor) -> torch.Tensor:
        gamma = self.to_gamma(cond)
        beta = self.to_beta(cond)
        return pixel_norm(x) * gamma[:, :, None, None] + beta[:, :, None, None]


def minibatch_stddev(x: torch.Tensor, eps: float = 1e-8) -> torch.Tensor:
    """Append one channel holding the batch-wide mean per-feature standard
    deviation (population convention). Constant across the batch and pixels."""
    n = x.shape[0]
    if n < 2:
        warnings.warn("minibatch stddev over a single sample is zero")
        stat = x.new_zeros(())
    else:
        centered = x - x.mean(dim=0, keepdim=True)
        stat = (centered.pow(2).mean(dim=0) + eps).sqrt().mean()
    extra = stat.expand(n, 1, x.shape[2], x.shape[3])
    return torch.cat([x, extra], dim=1)


def progressive_blend(low_up: torch.Tensor, high: torch.Tensor, alpha: float) -> torch.Tensor:
    """Fade between an upsampled lower-resolution image and the current one."""
    if not 0.0 <= alpha <= 1.0:
        raise ModelError(f"alpha must be in [0, 1], got {alpha}")
    if low_up.shape != high.shape:
        raise ModelError(f"shape mismatch {tuple(low_up.shape)} vs {tuple(high.shape)}")
    return (1.0 - alpha) * low_up + alpha * high


def projection_score(phi: torch.Tensor, y: torch.Tensor, V: torch.Tensor, psi) -> torch.Tensor:
    """Conditional discriminator output: psi(phi) + <V y, phi>.

    Multi-hot labels enter linearly, as the sum of the active per-label
    embedding rows.
    """
    if V.shape[1] != phi.shape[-1]:
        raise ModelError(f"embedding dim {V.shape[1]} != feature dim {phi.shape[-1]}")
    if y.shape[-1] != V.shape[0]:
        raise ModelError(f"label length {y.shape[-1]} != embedding rows {V.shape[0]}")
    embedded = y.to(V.dtype) @ V
    base = psi(phi)
    if base.ndim == phi.ndim:
        base = base.squeeze(-1)
    return base + (embedded * phi).sum(dim=-1)


def upsample2x(x: torch.Tensor) -> torch.Tensor:
    return F.interpolate(x, scale_factor=2, mode="nearest")


def downsample2x(x: torch.Tensor) -> torch.Tensor:
    return F.avg_pool2d(x, kernel_size=2)


def leaky(x: torch.Tensor) -> torch.Tensor:
    return F.leaky_relu(x, LEAKY_SLOPE)
