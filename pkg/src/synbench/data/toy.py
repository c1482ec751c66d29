"""Procedural toy corpus: label bits drive visible shape primitives.

Each label index owns a grid cell of the image and a primitive kind (disc,
bar, ring, cross, box, diag). When the bit is set, the primitive is drawn at
that cell with jittered size and position. All images of one patient share a
smooth patient-specific background texture, so patient leakage across folds is
detectable, and every image carries pixel noise of configurable amplitude.

A simple mean-intensity threshold over a label's home cell separates positive
from negative images by a wide margin, which downstream tests use as an
independent detectability oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .records import SUPPORTED_SIDES, DataError, ImageRecord, LabeledImageSet, bits_from_key

PRIMITIVES = ("disc", "bar", "ring", "cross", "box", "diag")


@dataclass
class ToySpec:
    n_patients: int
    labels: list[str]  # primitive kinds, cycled over PRIMITIVES if unnamed
    images_per_patient: int = 10
    resolution: int = 32
    noise_level: float = 0.1
    # Either an explicit combo table (uniformly sampled bit patterns) or
    # independent Bernoulli bits with optional copy-the-previous-bit coupling.
    combos: list[str] | None = None
    p_active: float = 0.5
    co_occurrence: float = 0.0
    background_amplitude: float = 0.12
    shape_intensity: float = 0.65


def _grid_cells(n_labels: int, side: int) -> list[tuple[float, float]]:
    """Home center (row, col) for each label on a near-square grid."""
    cols = int(np.ceil(np.sqrt(n_labels)))
    rows = int(np.ceil(n_labels / cols))
    centers = []
    for i in range(n_labels):
        r, c = divmod(i, cols)
        centers.append(((r + 0.5) * side / rows, (c + 0.5) * side / cols))
    return centers


def primitive_region(label_index: int, n_labels: int, side: int) -> tuple[slice, slice]:
    """Bounding box (row slice, col slice) of a label's grid cell.

    The jittered primitive always stays inside this box; detectors and
    attribution checks key off it.
    """
    cols = int(np.ceil(np.sqrt(n_labels)))
    rows = int(np.ceil(n_labels / cols))
    r, c = divmod(label_index, cols)
    return (
        slice(int(r * side / rows), int((r + 1) * side / rows)),
        slice(int(c * side / cols), int((c + 1) * side / cols)),
    )


def _draw_primitive(canvas: np.ndarray, kind: str, center: tuple[float, float],
                    radius: float, value: float) -> None:
    side = canvas.shape[0]
    yy, xx = np.mgrid[0:side, 0:side].astype(np.float64)
    cy, cx = center
    dy, dx = yy - cy, xx - cx
    rr = np.sqrt(dy * dy + dx * dx)
    if kind == "disc":
        mask = rr <= radius
    elif kind == "ring":
        mask = (rr <= radius) & (rr >= radius * 0.55)
    elif kind == "bar":
        mask = (np.abs(dy) <= radius * 0.35) & (np.abs(dx) <= radius)
    elif kind == "cross":
        mask = ((np.abs(dy) <= radius * 0.3) & (np.abs(dx) <= radius)) | (
            (np.abs(dx) <= radius * 0.3) & (np.abs(dy) <= radius)
        )
    elif kind == "box":
        inside = (np.abs(dy) <= radius) & (np.abs(dx) <= radius)
        inner = (np.abs(dy) <= radius * 0.5) & (np.abs(dx) <= radius * 0.5)
        mask = inside & ~inner
    elif kind == "diag":
        mask = (np.abs(dy - dx) <= radius * 0.4) & (rr <= radius * 1.4)
    else:
        raise DataError(f"unknown primitive kind {kind!r}")
    canvas[mask] += value


def _patient_background(rng: np.random.Generator, side: int, amplitude: float) -> np.ndarray:
    """Smooth low-frequency texture unique to one patient."""
    yy, xx = np.mgrid[0:side, 0:side].astype(np.float64) / side
    bg = np.zeros((side, side))
    for _ in range(3):
        fy, fx = rng.uniform(0.5, 2.5, size=2)
        py, px = rng.uniform(0, 2 * np.pi, size=2)
        bg += np.cos(2 * np.pi * fy * yy + py) * np.cos(2 * np.pi * fx * xx + px)
    bg = bg / 3.0
    return 0.18 + amplitude * bg


def _sample_bits(rng: np.random.Generator, spec: ToySpec) -> np.ndarray:
    if spec.combos:
        key = spec.combos[rng.integers(len(spec.combos))]
        return bits_from_key(key)
    bits = np.zeros(len(spec.labels), dtype=np.uint8)
    bits[0] = rng.random() < spec.p_active
    for i in range(1, len(spec.labels)):
        if rng.random() < spec.co_occurrence:
            bits[i] = bits[i - 1]
        else:
            bits[i] = rng.random() < spec.p_active
    return bits


def generate_toy_corpus(spec: ToySpec, seed: int = 0) -> LabeledImageSet:
    """Deterministically generate the corpus; same seed gives identical bytes."""
    if spec.resolution not in SUPPORTED_SIDES:
        raise DataError(f"resolution {spec.resolution} not in {SUPPORTED_SIDES}")
    if len(spec.labels) < 2:
        raise DataError("toy corpus needs at least 2 labels")
    if spec.combos:
        for key in spec.combos:
            if len(key) != len(spec.labels):
                raise DataError(f"combo {key!r} length != {len(spec.labels)} labels")

    side = spec.resolution
    n_labels = len(spec.labels)
    centers = _grid_cells(n_labels, side)
    kinds = [PRIMITIVES[i % len(PRIMITIVES)] for i in range(n_labels)]
    # Primitive must stay inside its grid cell even at maximal jitter.
    cols = int(np.ceil(np.sqrt(n_labels)))
    rows = int(np.ceil(n_labels / cols))
    cell = min(side / rows, side / cols)
    base_radius = cell * 0.30

    root = np.random.SeedSequence(seed)
    patient_seeds = root.spawn(spec.n_patients)

    records: list[ImageRecord] = []
    for p in range(spec.n_patients):
        prng = np.random.default_rng(patient_seeds[p])
        pid = f"p{p:05d}"
        background = _patient_background(prng, side, spec.background_amplitude)
        for k in range(spec.images_per_patient):
            bits = _sample_bits(prng, spec)
            canvas = background.copy()
            for i in range(n_labels):
                if not bits[i]:
                    continue
                jitter = prng.uniform(-cell * 0.08, cell * 0.08, size=2)
                radius = base_radius * prng.uniform(0.8, 1.2)
                center = (centers[i][0] + jitter[0], centers[i][1] + jitter[1])
                _draw_primitive(canvas, kinds[i], center, radius, spec.shape_intensity)
            canvas += prng.normal(0.0, spec.noise_level, size=canvas.shape)
            pixels = np.clip(canvas, 0.0, 1.0).astype(np.float32)
            records.append(ImageRecord(f"{pid}-i{k:03d}", pid, pixels, bits))

    out = LabeledImageSet(labels=list(spec.labels), records=records)
    out.validate()
    return out


def region_mean_scores(dataset: LabeledImageSet) -> np.ndarray:
    """Per-image, per-label mean intensity over each label's home cell.

    This is the threshold-detector oracle: scores separate bit=1 from bit=0
    records without any learning.
    """
    n_labels = len(dataset.labels)
    side = dataset.side
    regions = [primitive_region(i, n_labels, side) for i in range(n_labels)]
    scores = np.zeros((len(dataset.records), n_labels), dtype=np.float64)
    for r, rec in enumerate(dataset.records):
        for i, (ys, xs) in enumerate(regions):
            scores[r, i] = float(rec.pixels[ys, xs].mean())
    return scores
