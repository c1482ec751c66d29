"""Label binarization policies and rare-combination filtering.

Two ingestion policies are supported:

* ``chest``: per-label states in {pos, neg, uncertain}; uncertain maps to
  positive so no data is discarded.
* ``ct``: per-label presence probabilities; any p > 0 maps to positive. The
  heavily over-represented no-finding class is then undersampled until
  positive records make up at least half of the set.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .records import DataError, ImageRecord, LabeledImageSet

POLICIES = ("chest", "ct")

CHEST_STATES = ("pos", "neg", "uncertain")


@dataclass
class RawRecord:
    """A record as delivered by an upstream labeler, before binarization."""

    image_id: str
    patient_id: str
    pixels: np.ndarray
    states: list  # str states (chest) or float probabilities (ct)


def _chest_bits(states, image_id: str) -> np.ndarray:
    bits = np.zeros(len(states), dtype=np.uint8)
    for i, s in enumerate(states):
        if s is None:
            raise DataError(f"{image_id}: missing label slot {i}")
        if s not in CHEST_STATES:
            raise DataError(f"{image_id}: unknown label state {s!r}")
        bits[i] = 0 if s == "neg" else 1  # pos and uncertain both count
    return bits


def _ct_bits(states, image_id: str) -> np.ndarray:
    bits = np.zeros(len(states), dtype=np.uint8)
    for i, p in enumerate(states):
        if p is None:
            raise DataError(f"{image_id}: missing label slot {i}")
        bits[i] = 1 if float(p) > 0 else 0
    return bits


def binarize_labels(
    raw_records: list[RawRecord],
    labels: list[str],
    policy: str,
    seed: int = 0,
    no_finding_label: str = "no_finding",
) -> LabeledImageSet:
    """Apply a modality policy to raw label states; deterministic given seed.

    The no-finding bit stays mutually exclusive with positive findings:
    records with any positive finding get it cleared.
    """
    if policy not in POLICIES:
        raise DataError(f"unknown policy {policy!r}, expected one of {POLICIES}")
    nf = labels.index(no_finding_label) if no_finding_label in labels else None

    records: list[ImageRecord] = []
    for raw in raw_records:
        if len(raw.states) != len(labels):
            raise DataError(f"{raw.image_id}: {len(raw.states)} label slots, expected {len(labels)}")
        bits = _chest_bits(raw.states, raw.image_id) if policy == "chest" else _ct_bits(raw.states, raw.image_id)
        if nf is not None:
            findings = np.delete(bits, nf)
            if findings.any():
                bits[nf] = 0
            elif policy == "ct":
                # All-negative CT probabilities mean the no-finding class.
                bits[nf] = 1
        records.append(ImageRecord(raw.image_id, raw.patient_id, raw.pixels, bits))

    out = LabeledImageSet(labels=list(labels), records=records, no_finding=nf)
    if policy == "ct" and nf is not None:
        out = _undersample_no_finding(out, nf, seed)
    out.validate()
    return out


def _undersample_no_finding(dataset: LabeledImageSet, nf: int, seed: int) -> LabeledImageSet:
    """Drop no-finding records until positives are at least half of the set."""
    positives = [r for r in dataset.records if not r.bits[nf]]
    negatives = [r for r in dataset.records if r.bits[nf]]
    if len(negatives) <= len(positives):
        return dataset
    if not positives:
        warnings.warn("no positive records: no-finding undersampling skipped")
        return dataset
    rng = np.random.default_rng(seed)
    keep = rng.choice(len(negatives), size=len(positives), replace=False)
    kept = [negatives[i] for i in sorted(keep)]
    merged = {r.image_id for r in kept}
    records = [r for r in dataset.records if not r.bits[nf] or r.image_id in merged]
    return LabeledImageSet(labels=dataset.labels, records=records, no_finding=nf)


def filter_rare_combinations(dataset: LabeledImageSet, min_count: int) -> LabeledImageSet:
    """Remove every record whose label combination occurs fewer than min_count times."""
    if min_count < 1:
        raise DataError(f"min_count must be >= 1, got {min_count}")
    counts = dataset.combo_counts()
    surviving = {key for key, n in counts.items() if n >= min_count}
    records = [r for r in dataset.records if r.combo_key in surviving]
    if not records:
        raise DataError(f"min_count={min_count} removed every record")
    dropped = len(dataset.records) - len(records)
    if dropped:
        warnings.warn(f"filter_rare_combinations dropped {dropped} records "
                      f"({len(counts) - len(surviving)} combos below {min_count})")
    return LabeledImageSet(labels=dataset.labels, records=records, no_finding=dataset.no_finding)
