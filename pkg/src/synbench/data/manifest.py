"""On-disk corpus format: 8-bit grayscale PNGs plus a single CSV manifest.

Layout:
    <root>/manifest.csv           columns: image_id, patient_id, <label...>, fold
    <root>/images/<patient_id>/<image_id>.png

The fold column holds one of train/val/test or the empty string when the
record is unassigned.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np
from PIL import Image

from .records import DataError, ImageRecord, LabeledImageSet

FOLD_NAMES = ("train", "val", "test")


def _safe_name(image_id: str) -> str:
    # Duplicate-suffix ids ("x#dup3") must stay valid filenames.
    return image_id.replace("#", "_").replace("/", "_")


def write_png(path: Path, pixels: np.ndarray) -> None:
    arr = np.clip(np.round(pixels * 255.0), 0, 255).astype(np.uint8)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(arr, mode="L").save(path)


def read_png(path: Path) -> np.ndarray:
    with Image.open(path) as img:
        arr = np.asarray(img.convert("L"), dtype=np.float32)
    return arr / 255.0


def save_set(
    dataset: LabeledImageSet,
    root: str | Path,
    folds: dict[str, str] | None = None,
) -> Path:
    """Write images and the manifest; returns the manifest path.

    `folds` maps image_id -> fold name; missing ids get an empty fold cell.
    """
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    manifest = root / "manifest.csv"
    folds = folds or {}
    with open(manifest, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["image_id", "patient_id", *dataset.labels, "fold"])
        for rec in dataset.records:
            png = root / "images" / rec.patient_id / f"{_safe_name(rec.image_id)}.png"
            write_png(png, rec.pixels)
            writer.writerow(
                [rec.image_id, rec.patient_id, *(int(b) for b in rec.bits), folds.get(rec.image_id, "")]
            )
    return manifest


def load_set(root: str | Path) -> tuple[LabeledImageSet, dict[str, str]]:
    """Read a corpus back; returns the set and the image_id -> fold map."""
    root = Path(root)
    manifest = root / "manifest.csv"
    if not manifest.exists():
        raise DataError(f"no manifest.csv under {root}")
    with open(manifest, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:2] != ["image_id", "patient_id"] or header[-1] != "fold":
            raise DataError(f"unexpected manifest columns: {header}")
        labels = header[2:-1]
        records: list[ImageRecord] = []
        folds: dict[str, str] = {}
        for row in reader:
            image_id, patient_id = row[0], row[1]
            bits = np.array([int(v) for v in row[2:-1]], dtype=np.uint8)
            fold = row[-1]
            png = root / "images" / patient_id / f"{_safe_name(image_id)}.png"
            records.append(
                ImageRecord(image_id=image_id, patient_id=patient_id, pixels=read_png(png), bits=bits)
            )
            if fold:
                if fold not in FOLD_NAMES:
                    raise DataError(f"{image_id}: unknown fold {fold!r}")
                folds[image_id] = fold
    dataset = LabeledImageSet(labels=labels, records=records)
    return dataset, folds


def load_fold(root: str | Path, fold: str) -> LabeledImageSet:
    dataset, folds = load_set(root)
    ids = [i for i, f in folds.items() if f == fold]
    if not ids:
        raise DataError(f"fold {fold!r} is empty in {root}")
    return dataset.subset(ids)
