"""Scoring networks mirroring the generators block for block.

Blocks run two 3x3 convolutions (the first one widens channels when the
schedule grows toward low resolution) and then halve the resolution by average
pooling. The residual wiring adds a pooled 1x1-projected shortcut around each
block; the progressive wiring instead fades a freshly added block against the
downsampled image. The batch-wide feature deviation statistic is appended as
an extra channel before the final block, and conditioning enters either as a
projection term on the final feature vector or as an auxiliary label head.
"""

from __future__ import annotations

import math

import torch
from torch import nn

from .layers import (
    EqualizedConv2d,
    EqualizedLinear,
    ModelError,
    downsample2x,
    leaky,
    minibatch_stddev,
    progressive_blend,
    projection_score,
)
from .topology import NetworkTopology


class _DiscBlock(nn.Module):
    def __init__(self, in_c: int, out_c: int, residual: bool):
        super().__init__()
        self.conv1 = EqualizedConv2d(in_c, out_c, 3, padding=1)
        self.conv2 = EqualizedConv2d(out_c, out_c, 3, padding=1)
        self.residual = residual
        if residual:
            self.skip = EqualizedConv2d(in_c, out_c, 1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        h = leaky(self.conv1(x))
        h = leaky(self.conv2(h))
        h = downsample2x(h)
        if self.residual:
            s = self.skip(downsample2x(x))
            h = (h + s) / math.sqrt(2.0)
        return h


class Discriminator(nn.Module):
    def __init__(self, topology: NetworkTopology):
        super().__init__()
        self.topology = topology
        t = topology
        sched = t.channel_schedule()
        residual = t.discriminator_wiring == "residual"

        self.from_image = nn.ModuleDict(
            {str(r): EqualizedConv2d(1, sched[r], 1) for r in t.resolutions()}
        )
        # Block at resolution r maps features at r down to r/2; channels grow
        # from sched[r] to sched[r/2] on the first convolution.
        self.blocks = nn.ModuleDict()
        for r in t.resolutions()[1:]:
            self.blocks[str(r)] = _DiscBlock(sched[r], sched[r // 2], residual)

        c_base = sched[t.base_resolution]
        self.final_conv = EqualizedConv2d(c_base + 1, c_base, 3, padding=1)
        self.final_linear = EqualizedLinear(c_base * t.base_resolution ** 2, c_base)
        self.psi = EqualizedLinear(c_base, 1)
        self.feature_dim = c_base
        if t.conditioning == "projection":
            self.label_embedding = nn.Parameter(torch.randn(t.label_dim, c_base))
        else:
            self.aux_head = EqualizedLinear(c_base, t.label_dim)

    def _final_features(self, x: torch.Tensor) -> torch.Tensor:
        x = minibatch_stddev(x)
        x = leaky(self.final_conv(x))
        x = x.flatten(1)
        return leaky(self.final_linear(x))

    def features(
        self, img: torch.Tensor, alpha: float = 1.0, resolution: int | None = None
    ) -> torch.Tensor:
        """Final feature vector phi for a batch of images."""
        t = self.topology
        res = resolution or t.target_resolution
        if res not in t.resolutions():
            raise ModelError(f"resolution {res} outside this topology")
        if img.shape[-1] != res:
            raise ModelError(f"image side {img.shape[-1]} != active resolution {res}")

        x = leaky(self.from_image[str(res)](img))
        descend = [r for r in reversed(t.resolutions()[1:]) if r <= res]
        for i, r in enumerate(descend):
            x = self.blocks[str(r)](x)
            if i == 0 and alpha < 1.0 and t.discriminator_wiring == "progressive":
                low = leaky(self.from_image[str(res // 2)](downsample2x(img)))
                x = progressive_blend(low, x, alpha)
        return self._final_features(x)

    def forward(
        self,
        img: torch.Tensor,
        y: torch.Tensor | None = None,
        alpha: float = 1.0,
        resolution: int | None = None,
    ) -> tuple[torch.Tensor, torch.Tensor | None]:
        """Returns (score, aux_label_logits). Projection conditioning folds y
        into the score and returns no logits; auxiliary conditioning ignores y
        here and returns logits for the label loss."""
        t = self.topology
        phi = self.features(img, alpha=alpha, resolution=resolution)
        if t.conditioning == "projection":
            if y is None:
                raise ModelError("projection discriminator needs labels")
            V = self.label_embedding * math.sqrt(2.0 / t.label_dim)
            score = projection_score(phi, y, V, self.psi)
            return score, None
        score = self.psi(phi).squeeze(-1)
        return score, self.aux_head(phi)
