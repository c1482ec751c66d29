"""Network topology descriptor shared by generator and discriminator builders."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .layers import ModelError

RESOLUTIONS = (8, 16, 32, 64, 128, 256, 512)

CONDITIONING = ("auxiliary", "projection")
GENERATOR_WIRING = ("progressive", "output_skip")
DISCRIMINATOR_WIRING = ("progressive", "residual")


@dataclass
class NetworkTopology:
    target_resolution: int
    label_dim: int
    conditioning: str = "projection"
    generator_wiring: str = "output_skip"
    discriminator_wiring: str = "residual"
    base_resolution: int = 8
    max_channels: int = 512
    latent_dim: int = 512

    def __post_init__(self) -> None:
        if self.base_resolution != 8:
            raise ModelError("base resolution is fixed at 8")
        if self.target_resolution not in RESOLUTIONS or self.target_resolution < self.base_resolution:
            raise ModelError(f"unsupported target resolution {self.target_resolution}")
        if self.conditioning not in CONDITIONING:
            raise ModelError(f"conditioning must be one of {CONDITIONING}")
        if self.generator_wiring not in GENERATOR_WIRING:
            raise ModelError(f"generator wiring must be one of {GENERATOR_WIRING}")
        if self.discriminator_wiring not in DISCRIMINATOR_WIRING:
            raise ModelError(f"discriminator wiring must be one of {DISCRIMINATOR_WIRING}")
        if self.label_dim < 1 or self.latent_dim < 1 or self.max_channels < 1:
            raise ModelError("label_dim, latent_dim and max_channels must be positive")

    @property
    def cond_dim(self) -> int:
        return self.latent_dim + self.label_dim

    def resolutions(self) -> list[int]:
        """Block resolutions from base to target, inclusive."""
        out = []
        r = self.base_resolution
        while r <= self.target_resolution:
            out.append(r)
            r *= 2
        return out

    def channels(self, resolution: int) -> int:
        """Constant max_channels up to 32, halved with each doubling above."""
        if resolution <= 32:
            return self.max_channels
        halvings = int(math.log2(resolution / 32))
        return max(1, self.max_channels >> halvings)

    def channel_schedule(self) -> dict[int, int]:
        return {r: self.channels(r) for r in self.resolutions()}

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "NetworkTopology":
        return cls(**data)


def cpd_topology(target_resolution: int, label_dim: int, max_channels: int = 512,
                 latent_dim: int = 512) -> NetworkTopology:
    """Conditional-normalization model: projection conditioning, output-skip
    generator, residual discriminator, no progressive growth."""
    return NetworkTopology(
        target_resolution=target_resolution,
        label_dim=label_dim,
        conditioning="projection",
        generator_wiring="output_skip",
        discriminator_wiring="residual",
        max_channels=max_channels,
        latent_dim=latent_dim,
    )


def prog_topology(target_resolution: int, label_dim: int, max_channels: int = 512,
                  latent_dim: int = 512) -> NetworkTopology:
    """Reference progressive-growth model with auxiliary-classifier conditioning."""
    return NetworkTopology(
        target_resolution=target_resolution,
        label_dim=label_dim,
        conditioning="auxiliary",
        generator_wiring="progressive",
        discriminator_wiring="progressive",
        max_channels=max_channels,
        latent_dim=latent_dim,
    )
