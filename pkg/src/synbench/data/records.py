"""Core dataset currency: labeled grayscale image records grouped per corpus.

Pixel arrays are float32 in [0, 1], square, with side length restricted to the
supported power-of-two set. Labels are binary multi-hot vectors; the unique bit
pattern of a record is its "combo", keyed by the canonical 0/1 string.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

SUPPORTED_SIDES = (32, 64, 128, 256, 512)

# Record ids of oversampled duplicates carry this marker plus a counter so the
# expanded fold keeps unique ids while the base identity stays recoverable.
DUP_MARKER = "#dup"


class DataError(ValueError):
    """Raised for corpus-level contract violations (bad labels, empty sets, ...)."""


def combo_key(bits: np.ndarray) -> str:
    """Canonical string key of a binary label pattern, e.g. [1,0,1] -> '101'."""
    return "".join("1" if b else "0" for b in np.asarray(bits).ravel())


def bits_from_key(key: str) -> np.ndarray:
    return np.array([1 if c == "1" else 0 for c in key], dtype=np.uint8)


def base_id(image_id: str) -> str:
    """Strip the duplication suffix an oversampler may have appended."""
    idx = image_id.find(DUP_MARKER)
    return image_id if idx < 0 else image_id[:idx]


@dataclass
class ImageRecord:
    image_id: str
    patient_id: str
    pixels: np.ndarray  # float32, shape (side, side), values in [0, 1]
    bits: np.ndarray  # uint8, one slot per label

    def validate(self, n_labels: int) -> None:
        if self.pixels.ndim != 2 or self.pixels.shape[0] != self.pixels.shape[1]:
            raise DataError(f"{self.image_id}: pixels must be square 2D, got {self.pixels.shape}")
        if self.pixels.shape[0] not in SUPPORTED_SIDES:
            raise DataError(f"{self.image_id}: side {self.pixels.shape[0]} not in {SUPPORTED_SIDES}")
        if self.bits.shape != (n_labels,):
            raise DataError(f"{self.image_id}: label vector length {self.bits.shape} != {n_labels}")
        lo, hi = float(self.pixels.min()), float(self.pixels.max())
        if lo < -1e-6 or hi > 1 + 1e-6:
            raise DataError(f"{self.image_id}: pixel range [{lo}, {hi}] outside [0, 1]")

    @property
    def combo_key(self) -> str:
        return combo_key(self.bits)

    @property
    def side(self) -> int:
        return int(self.pixels.shape[0])


@dataclass
class LabeledImageSet:
    """An ordered collection of records over a fixed named label space."""

    labels: list[str]
    records: list[ImageRecord] = field(default_factory=list)
    # Index of the designated no-finding label, when the corpus has one. Used
    # to enforce mutual exclusivity with positive finding bits.
    no_finding: int | None = None

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def validate(self) -> None:
        if not self.labels:
            raise DataError("label space is empty")
        seen: set[str] = set()
        for rec in self.records:
            rec.validate(len(self.labels))
            if rec.image_id in seen:
                raise DataError(f"duplicate image_id {rec.image_id}")
            seen.add(rec.image_id)
            if self.no_finding is not None and rec.bits[self.no_finding]:
                others = np.delete(rec.bits, self.no_finding)
                if others.any():
                    raise DataError(
                        f"{rec.image_id}: no-finding bit set together with a positive finding"
                    )

    # -- aggregate views -------------------------------------------------

    def patients(self) -> list[str]:
        out: list[str] = []
        seen: set[str] = set()
        for rec in self.records:
            if rec.patient_id not in seen:
                seen.add(rec.patient_id)
                out.append(rec.patient_id)
        return out

    def combo_counts(self) -> Counter:
        return Counter(rec.combo_key for rec in self.records)

    def ids(self) -> list[str]:
        return [rec.image_id for rec in self.records]

    def by_id(self) -> dict[str, ImageRecord]:
        return {rec.image_id: rec for rec in self.records}

    def subset(self, image_ids) -> "LabeledImageSet":
        """Records whose id is in `image_ids`, original order preserved."""
        wanted = set(image_ids)
        recs = [r for r in self.records if r.image_id in wanted]
        return LabeledImageSet(labels=list(self.labels), records=recs, no_finding=self.no_finding)

    def pixel_array(self) -> np.ndarray:
        """Stack pixels into (n, side, side) float32."""
        if not self.records:
            raise DataError("empty image set")
        return np.stack([r.pixels for r in self.records]).astype(np.float32)

    def label_array(self) -> np.ndarray:
        return np.stack([r.bits for r in self.records]).astype(np.uint8)

    @property
    def side(self) -> int:
        if not self.records:
            raise DataError("empty image set")
        return self.records[0].side
