"""Self-describing checkpoint archive: versioned JSON topology header plus
named parameter arrays in one npz file."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from .discriminator import Discriminator
from .generator import Generator
from .layers import ModelError
from .topology import NetworkTopology

FORMAT_VERSION = 1


@dataclass
class GanCheckpoint:
    topology: NetworkTopology
    generator_state: dict
    discriminator_state: dict
    images_seen: int = 0
    fid_history: list[tuple[int, float]] = field(default_factory=list)
    stopped_at: int | None = None

    def __post_init__(self) -> None:
        steps = [s for s, _ in self.fid_history]
        if any(b <= a for a, b in zip(steps, steps[1:])):
            raise ModelError("fid_history must be strictly increasing in images_seen")

    def build_generator(self) -> Generator:
        g = Generator(self.topology)
        g.load_state_dict({k: torch.as_tensor(v) for k, v in self.generator_state.items()})
        g.eval()
        return g

    def build_discriminator(self) -> Discriminator:
        d = Discriminator(self.topology)
        d.load_state_dict({k: torch.as_tensor(v) for k, v in self.discriminator_state.items()})
        d.eval()
        return d


def checkpoint_from_models(
    topology: NetworkTopology,
    generator: Generator,
    discriminator: Discriminator,
    images_seen: int,
    fid_history: list[tuple[int, float]],
    stopped_at: int | None = None,
) -> GanCheckpoint:
    return GanCheckpoint(
        topology=topology,
        generator_state={k: v.detach().cpu().numpy().copy() for k, v in generator.state_dict().items()},
        discriminator_state={k: v.detach().cpu().numpy().copy() for k, v in discriminator.state_dict().items()},
        images_seen=images_seen,
        fid_history=list(fid_history),
        stopped_at=stopped_at,
    )


def save_checkpoint(ckpt: GanCheckpoint, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    meta = {
        "format_version": FORMAT_VERSION,
        "topology": ckpt.topology.to_dict(),
        "images_seen": ckpt.images_seen,
        "fid_history": [[int(s), float(f)] for s, f in ckpt.fid_history],
        "stopped_at": ckpt.stopped_at,
    }
    arrays = {f"g/{k}": np.asarray(v) for k, v in ckpt.generator_state.items()}
    arrays.update({f"d/{k}": np.asarray(v) for k, v in ckpt.discriminator_state.items()})
    with open(path, "wb") as fh:
        np.savez(fh, __meta__=np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8), **arrays)
    return path


def load_checkpoint(path: str | Path, expect: NetworkTopology | None = None) -> GanCheckpoint:
    """Load an archive; refuses topology mismatches when `expect` is given."""
    with np.load(path) as data:
        if "__meta__" not in data.files:
            raise ModelError(f"{path}: not a checkpoint archive")
        meta = json.loads(bytes(data["__meta__"]).decode())
        if meta.get("format_version") != FORMAT_VERSION:
            raise ModelError(f"{path}: unsupported format version {meta.get('format_version')}")
        topology = NetworkTopology.from_dict(meta["topology"])
        if expect is not None and topology != expect:
            raise ModelError(f"{path}: checkpoint topology {topology} != expected {expect}")
        g_state = {k[2:]: data[k] for k in data.files if k.startswith("g/")}
        d_state = {k[2:]: data[k] for k in data.files if k.startswith("d/")}
    return GanCheckpoint(
        topology=topology,
        generator_state=g_state,
        discriminator_state=d_state,
        images_seen=int(meta["images_seen"]),
        fid_history=[(int(s), float(f)) for s, f in meta["fid_history"]],
        stopped_at=meta["stopped_at"],
    )
