"""Image generators for both architectures.

Both map a concatenated noise+label vector to a grayscale image in [-1, 1]
through a stack of resolution-doubling blocks (two 3x3 convolutions with
leaky-ReLU each). They differ in wiring and normalization:

* output_skip ("cpd"): every block's features are projected to image space by
  a 1x1 convolution and summed along an upsampled skip path; every convolution
  is followed by label-and-noise conditional pixel normalization, and the
  first convolution of a block reduces channels when the schedule shrinks.
* progressive ("prog"): the image is read off the highest active block, with
  a linear fade blending in a freshly added resolution; plain pixel
  normalization, channels halve on the second convolution of a block.
"""

from __future__ import annotations

import torch
from torch import nn

from .layers import (
    ConditionalPixelNorm,
    EqualizedConv2d,
    EqualizedLinear,
    ModelError,
    leaky,
    pixel_norm,
    progressive_blend,
    upsample2x,
)
from .topology import NetworkTopology


class _GenBlock(nn.Module):
    """Upsample then two 3x3 convolutions; channel change position depends on
    the wiring (first conv for output_skip, second for progressive)."""

    def __init__(self, in_c: int, out_c: int, cond_dim: int | None, narrow_first: bool):
        super().__init__()
        mid = out_c if narrow_first else in_c
        self.conv1 = EqualizedConv2d(in_c, mid, 3, padding=1)
        self.conv2 = EqualizedConv2d(mid, out_c, 3, padding=1)
        self.conditional = cond_dim is not None
        if self.conditional:
            self.norm1 = ConditionalPixelNorm(cond_dim, mid)
            self.norm2 = ConditionalPixelNorm(cond_dim, out_c)

    def forward(self, x: torch.Tensor, cond: torch.Tensor | None) -> torch.Tensor:
        x = upsample2x(x)
        x = leaky(self.conv1(x))
        x = self.norm1(x, cond) if self.conditional else pixel_norm(x)
        x = leaky(self.conv2(x))
        x = self.norm2(x, cond) if self.conditional else pixel_norm(x)
        return x


class Generator(nn.Module):
    def __init__(self, topology: NetworkTopology):
        super().__init__()
        self.topology = topology
        t = topology
        sched = t.channel_schedule()
        c_base = sched[t.base_resolution]
        conditional = t.generator_wiring == "output_skip"
        cond_dim = t.cond_dim if conditional else None

        self.input_linear = EqualizedLinear(t.cond_dim, c_base * t.base_resolution ** 2)
        self.input_conv = EqualizedConv2d(c_base, c_base, 3, padding=1)
        self.conditional = conditional
        if conditional:
            self.input_norm1 = ConditionalPixelNorm(t.cond_dim, c_base)
            self.input_norm2 = ConditionalPixelNorm(t.cond_dim, c_base)

        self.blocks = nn.ModuleDict()
        self.to_image = nn.ModuleDict({str(t.base_resolution): EqualizedConv2d(c_base, 1, 1)})
        for r in t.resolutions()[1:]:
            self.blocks[str(r)] = _GenBlock(sched[r // 2], sched[r], cond_dim,
                                            narrow_first=conditional)
            self.to_image[str(r)] = EqualizedConv2d(sched[r], 1, 1)

    def _stem(self, cond: torch.Tensor) -> torch.Tensor:
        t = self.topology
        x = self.input_linear(cond)
        x = x.view(-1, t.channels(t.base_resolution), t.base_resolution, t.base_resolution)
        x = leaky(x)
        x = self.input_norm1(x, cond) if self.conditional else pixel_norm(x)
        x = leaky(self.input_conv(x))
        x = self.input_norm2(x, cond) if self.conditional else pixel_norm(x)
        return x

    def forward(
        self,
        z: torch.Tensor,
        y: torch.Tensor,
        alpha: float = 1.0,
        resolution: int | None = None,
    ) -> torch.Tensor:
        """Synthesize images conditioned on labels y.

        `resolution`/`alpha` select the active level during progressive
        growth; the output_skip wiring always renders the full stack and
        rejects partial resolutions.
        """
        t = self.topology
        res = resolution or t.target_resolution
        if res not in t.resolutions():
            raise ModelError(f"resolution {res} outside this topology")
        if z.shape[-1] != t.latent_dim or y.shape[-1] != t.label_dim:
            raise ModelError("latent or label width does not match the topology")
        cond = torch.cat([z, y.to(z.dtype)], dim=-1)
        x = self._stem(cond)

        if t.generator_wiring == "output_skip":
            if res != t.target_resolution:
                raise ModelError("output_skip generator renders only the target resolution")
            img = self.to_image[str(t.base_resolution)](x)
            for r in t.resolutions()[1:]:
                x = self.blocks[str(r)](x, cond)
                img = upsample2x(img) + self.to_image[str(r)](x)
            return torch.tanh(img)

        # progressive wiring
        if res == t.base_resolution:
            return torch.tanh(self.to_image[str(res)](x))
        prev = x
        for r in t.resolutions()[1:]:
            if r > res:
                break
            prev = x
            x = self.blocks[str(r)](x, None)
        img = self.to_image[str(res)](x)
        if alpha < 1.0:
            low = upsample2x(self.to_image[str(res // 2)](prev))
            img = progressive_blend(low, img, alpha)
        return torch.tanh(img)
