"""Session state and persistence for the reader study.

Each session lives in its own directory: an immutable session.json written at
creation (the only place truth labels exist) and an append-only verdicts.jsonl
log. Reports replay the log, so they are a pure function of what was recorded.
"""

from __future__ import annotations

import json
import secrets
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

N_REAL = 50
N_SYNTHETIC = 50
N_ITEMS = N_REAL + N_SYNTHETIC


class StudyError(ValueError):
    pass


@dataclass
class SessionItem:
    item_id: str
    image_path: str
    truth: str  # "real" | "synthetic"; never serialized to the client


@dataclass
class ReaderSession:
    session_id: str
    reader_id: str
    modality: str
    resolution: int
    seed: int
    items: list[SessionItem]
    verdicts: dict[str, str] = field(default_factory=dict)

    @property
    def state(self) -> str:
        return "complete" if len(self.verdicts) >= len(self.items) else "open"

    @property
    def answered(self) -> int:
        return len(self.verdicts)

    def next_index(self) -> int | None:
        for k, item in enumerate(self.items):
            if item.item_id not in self.verdicts:
                return k
        return None

    def truth_map(self) -> dict[str, str]:
        return {item.item_id: item.truth for item in self.items}


def _png_side(path: Path) -> int:
    with Image.open(path) as img:
        if img.size[0] != img.size[1]:
            raise StudyError(f"{path.name}: image is not square")
        return img.size[0]


def create_session(
    real_pool: list[Path],
    syn_pool: list[Path],
    reader_id: str,
    seed: int,
    modality: str = "toy",
    resolution: int | None = None,
    session_id: str | None = None,
) -> ReaderSession:
    """Sample 50 reals and 50 synthetics without replacement and shuffle them
    into a blinded order; deterministic in the seed."""
    if len(real_pool) < N_REAL:
        raise StudyError(f"real pool holds {len(real_pool)} images, need {N_REAL}")
    if len(syn_pool) < N_SYNTHETIC:
        raise StudyError(f"synthetic pool holds {len(syn_pool)} images, need {N_SYNTHETIC}")

    rng = np.random.default_rng(seed)
    real_pick = sorted(rng.choice(len(real_pool), size=N_REAL, replace=False))
    syn_pick = sorted(rng.choice(len(syn_pool), size=N_SYNTHETIC, replace=False))
    real_paths = [Path(real_pool[i]) for i in real_pick]
    syn_paths = [Path(syn_pool[i]) for i in syn_pick]

    sides = {_png_side(p) for p in real_paths + syn_paths}
    if len(sides) != 1:
        raise StudyError(f"mixed resolutions in pools: {sorted(sides)}")
    side = sides.pop()
    if resolution is not None and side != resolution:
        raise StudyError(f"pools are {side}px, session requested {resolution}px")

    entries = [(p, "real") for p in real_paths] + [(p, "synthetic") for p in syn_paths]
    order = rng.permutation(len(entries))
    # opaque item ids: index + seeded token, no hint of source or truth
    tokens = [f"it{k:03d}{rng.integers(0, 16**6):06x}" for k in range(len(entries))]
    items = [
        SessionItem(item_id=tokens[k], image_path=str(entries[i][0]), truth=entries[i][1])
        for k, i in enumerate(order)
    ]
    return ReaderSession(
        session_id=session_id or secrets.token_hex(8),
        reader_id=reader_id,
        modality=modality,
        resolution=side,
        seed=seed,
        items=items,
    )


class SessionStore:
    """Disk-backed session registry; verdict writes are serialized per session."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._guard = threading.Lock()

    def _lock(self, session_id: str) -> threading.Lock:
        with self._guard:
            return self._locks.setdefault(session_id, threading.Lock())

    def _dir(self, session_id: str) -> Path:
        return self.root / session_id

    def save_new(self, session: ReaderSession) -> None:
        d = self._dir(session.session_id)
        if d.exists():
            raise StudyError(f"session {session.session_id} already exists")
        d.mkdir(parents=True)
        payload = {
            "session_id": session.session_id,
            "reader_id": session.reader_id,
            "modality": session.modality,
            "resolution": session.resolution,
            "seed": session.seed,
            "items": [
                {"item_id": i.item_id, "image_path": i.image_path, "truth": i.truth}
                for i in session.items
            ],
        }
        (d / "session.json").write_text(json.dumps(payload))
        (d / "verdicts.jsonl").touch()

    def load(self, session_id: str) -> ReaderSession:
        d = self._dir(session_id)
        meta_file = d / "session.json"
        if not meta_file.exists():
            raise KeyError(session_id)
        meta = json.loads(meta_file.read_text())
        session = ReaderSession(
            session_id=meta["session_id"],
            reader_id=meta["reader_id"],
            modality=meta["modality"],
            resolution=meta["resolution"],
            seed=meta["seed"],
            items=[SessionItem(**i) for i in meta["items"]],
        )
        log = d / "verdicts.jsonl"
        if log.exists():
            for line in log.read_text().splitlines():
                if line.strip():
                    entry = json.loads(line)
                    session.verdicts[entry["item_id"]] = entry["verdict"]
        return session

    def record_verdict(self, session_id: str, index: int, verdict: str) -> ReaderSession:
        """Append one verdict; duplicates and out-of-range items are rejected,
        as is any write to a completed session."""
        if verdict not in ("real", "synthetic"):
            raise StudyError(f"bad verdict {verdict!r}")
        with self._lock(session_id):
            session = self.load(session_id)
            if session.state == "complete":
                raise StudyError("session is complete; verdicts are locked")
            if not 0 <= index < len(session.items):
                raise KeyError(f"item index {index} out of range")
            item = session.items[index]
            if item.item_id in session.verdicts:
                raise StudyError(f"item {index} already answered")
            entry = {"item_id": item.item_id, "verdict": verdict}
            with open(self._dir(session_id) / "verdicts.jsonl", "a") as fh:
                fh.write(json.dumps(entry) + "\n")
            session.verdicts[item.item_id] = verdict
            return session

    def list_sessions(self) -> list[str]:
        return sorted(p.name for p in self.root.iterdir() if (p / "session.json").exists())
