from .checkpoint import GanCheckpoint, checkpoint_from_models, load_checkpoint, save_checkpoint
from .discriminator import Discriminator
from .generator import Generator
from .layers import (
    ConditionalPixelNorm,
    EqualizedConv2d,
    EqualizedLinear,
    ModelError,
    NormalizationParams,
    conditional_pixel_norm,
    equalized_scale,
    minibatch_stddev,
    pixel_norm,
    progressive_blend,
    projection_score,
)
from .topology import NetworkTopology, cpd_topology, prog_topology


def build_generator(topology: NetworkTopology) -> Generator:
    return Generator(topology)


def build_discriminator(topology: NetworkTopology) -> Discriminator:
    return Discriminator(topology)


__all__ = [
    "ConditionalPixelNorm",
    "Discriminator",
    "EqualizedConv2d",
    "EqualizedLinear",
    "GanCheckpoint",
    "Generator",
    "ModelError",
    "NetworkTopology",
    "NormalizationParams",
    "build_discriminator",
    "build_generator",
    "checkpoint_from_models",
    "conditional_pixel_norm",
    "cpd_topology",
    "equalized_scale",
    "load_checkpoint",
    "minibatch_stddev",
    "pixel_norm",
    "prog_topology",
    "progressive_blend",
    "projection_score",
    "save_checkpoint",
]
