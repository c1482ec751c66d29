"""Patient-stratified fold splitting and benchmark-setting fold construction.

Patients (never single images) are partitioned into train/val/test within
strata of label combinations, so no patient leaks across folds. Benchmark
settings then carve class-balanced folds out of the split pool, oversampling
by round-robin duplication when a combination is short of images.
"""

from __future__ import annotations

import hashlib
from collections import Counter, defaultdict
from dataclasses import dataclass, field

import numpy as np

from .records import DUP_MARKER, DataError, ImageRecord, LabeledImageSet, base_id

AXES = ("classes", "samples", "resolution")


@dataclass
class FoldAssignment:
    train: set[str]
    val: set[str]
    test: set[str]
    ratios: tuple[float, float, float]
    seed: int

    def fold_of(self) -> dict[str, str]:
        out = {i: "train" for i in self.train}
        out.update({i: "val" for i in self.val})
        out.update({i: "test" for i in self.test})
        return out

    def validate(self, dataset: LabeledImageSet) -> None:
        if self.train & self.val or self.train & self.test or self.val & self.test:
            raise DataError("folds overlap")
        assigned = self.train | self.val | self.test
        all_ids = set(dataset.ids())
        if assigned != all_ids:
            raise DataError("every image must be assigned to exactly one fold")


@dataclass
class BenchmarkSetting:
    """One benchmark row: which combos, how many per combo, at what resolution."""

    axis: str
    class_subset: list[str]
    n_per_combo: int
    n_train: int
    n_val: int
    n_test: int
    resolution: int
    name: str = ""

    def __post_init__(self) -> None:
        if self.axis not in AXES:
            raise DataError(f"axis must be one of {AXES}, got {self.axis!r}")
        if not self.class_subset:
            raise DataError("class_subset must be non-empty")
        if min(self.n_per_combo, self.n_train, self.n_val, self.n_test) <= 0:
            raise DataError("all setting counts must be positive")
        if self.axis in ("classes", "samples"):
            expected = self.n_per_combo * len(self.class_subset)
            if self.n_train != expected:
                raise DataError(
                    f"n_train={self.n_train} but n_per_combo*|class_subset|={expected}"
                )
        if not self.name:
            self.name = f"{self.axis}-{len(self.class_subset)}c-{self.n_per_combo}s-{self.resolution}px"


def _stratum_rng(seed: int, key: str) -> np.random.Generator:
    digest = hashlib.sha256(f"{seed}:{key}".encode()).digest()
    return np.random.default_rng(int.from_bytes(digest[:8], "little"))


def _patient_strata(dataset: LabeledImageSet) -> dict[str, list[str]]:
    """Stratum per patient: the patient's most frequent combo, ties by
    lexicographically smallest combo key."""
    per_patient: dict[str, Counter] = defaultdict(Counter)
    order: list[str] = []
    for rec in dataset.records:
        if rec.patient_id not in per_patient:
            order.append(rec.patient_id)
        per_patient[rec.patient_id][rec.combo_key] += 1
    strata: dict[str, list[str]] = defaultdict(list)
    for pid in order:
        counts = per_patient[pid]
        best = min(sorted(counts), key=lambda k: (-counts[k], k))
        strata[best].append(pid)
    return strata


def stratified_patient_split(
    dataset: LabeledImageSet,
    ratios: tuple[float, float, float] = (0.8, 0.1, 0.1),
    seed: int = 0,
) -> FoldAssignment:
    """Partition patients within combo strata at the given ratios.

    Within each stratum, patient counts match the ratios to within one
    patient (cumulative rounding). Single-patient strata go to train so the
    GAN keeps the data; val/test tolerate the absence.
    """
    if not dataset.records:
        raise DataError("cannot split an empty set")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise DataError(f"ratios must sum to 1, got {ratios}")

    fold_of_patient: dict[str, str] = {}
    for key, patients in sorted(_patient_strata(dataset).items()):
        rng = _stratum_rng(seed, key)
        patients = sorted(patients)
        rng.shuffle(patients)
        n = len(patients)
        if n == 1:
            fold_of_patient[patients[0]] = "train"
            continue
        cut1 = int(round(n * ratios[0]))
        cut2 = int(round(n * (ratios[0] + ratios[1])))
        for pid in patients[:cut1]:
            fold_of_patient[pid] = "train"
        for pid in patients[cut1:cut2]:
            fold_of_patient[pid] = "val"
        for pid in patients[cut2:]:
            fold_of_patient[pid] = "test"

    folds: dict[str, set[str]] = {"train": set(), "val": set(), "test": set()}
    for rec in dataset.records:
        folds[fold_of_patient[rec.patient_id]].add(rec.image_id)
    out = FoldAssignment(folds["train"], folds["val"], folds["test"], tuple(ratios), seed)
    out.validate(dataset)
    return out


def _resample_ids(ids: list[str], target: int, rng: np.random.Generator) -> list[str]:
    """Exactly `target` ids out of `ids`: subsample without replacement when
    over-supplied, round-robin duplicate when short. Duplicates get unique
    suffixed ids so manifests stay collision-free."""
    n = len(ids)
    if n == 0:
        raise DataError("cannot sample from an empty combo")
    if n == target:
        out = list(ids)
        rng.shuffle(out)
        return out
    if n > target:
        pick = rng.choice(n, size=target, replace=False)
        return [ids[i] for i in sorted(pick)]
    reps = target // n
    extra = target % n
    chosen = set(rng.choice(n, size=extra, replace=False)) if extra else set()
    out: list[str] = []
    for i, image_id in enumerate(ids):
        copies = reps + (1 if i in chosen else 0)
        out.append(image_id)
        for k in range(1, copies):
            out.append(f"{image_id}{DUP_MARKER}{k}")
    return out


def _take_fold(
    dataset: LabeledImageSet,
    fold_ids: set[str],
    combos: list[str],
    total: int | None,
    per_combo: int | None,
    rng: np.random.Generator,
    require_all: bool,
    proportional: bool = False,
) -> LabeledImageSet:
    by_combo: dict[str, list[str]] = defaultdict(list)
    index = dataset.by_id()
    for rec in dataset.records:
        if rec.image_id in fold_ids and rec.combo_key in combos:
            by_combo[rec.combo_key].append(rec.image_id)

    present = [c for c in combos if by_combo.get(c)]
    if require_all and len(present) != len(combos):
        missing = [c for c in combos if c not in present]
        raise DataError(f"combos absent from source fold: {missing}")
    if not present:
        raise DataError("no requested combo present in the source fold")

    targets: dict[str, int]
    if per_combo is not None:
        targets = {c: per_combo for c in present}
    elif proportional:
        # Mirror the natural combo proportions of this fold (largest
        # remainder), never exceeding what the fold holds.
        counts = {c: len(by_combo[c]) for c in present}
        pool_total = sum(counts.values())
        total = min(total, pool_total)
        shares = {c: total * counts[c] / pool_total for c in present}
        targets = {c: int(shares[c]) for c in present}
        leftovers = sorted(present, key=lambda c: (-(shares[c] - targets[c]), c))
        short = total - sum(targets.values())
        for c in leftovers[:short]:
            targets[c] += 1
    else:
        # Mirror the train fold's uniform combo proportions.
        base = total // len(present)
        rem = total % len(present)
        targets = {c: base + (1 if i < rem else 0) for i, c in enumerate(sorted(present))}

    records = []
    for combo in present:
        ids = sorted(by_combo[combo])
        for image_id in _resample_ids(ids, targets[combo], rng):
            src = index[base_id(image_id)]
            if image_id == src.image_id:
                records.append(src)
            else:
                records.append(ImageRecord(image_id, src.patient_id, src.pixels, src.bits))
    return LabeledImageSet(labels=list(dataset.labels), records=records, no_finding=dataset.no_finding)


def build_benchmark_setting(
    dataset: LabeledImageSet,
    folds: FoldAssignment,
    setting: BenchmarkSetting,
    seed: int = 0,
) -> tuple[LabeledImageSet, LabeledImageSet, LabeledImageSet]:
    """Materialize the train/val/test folds of one benchmark setting.

    On the classes and samples axes the train fold is balanced to exactly
    n_per_combo images per combination and val/test mirror that uniform
    proportion. On the resolution axis the train fold is the full pool subset
    at its natural proportions and val/test mirror those. Duplication never
    crosses folds (val comes only from val, test from test).
    """
    rng = np.random.default_rng(seed)
    if setting.axis == "resolution":
        train = _take_fold_all(dataset, folds.train, setting.class_subset)
        val = _take_fold(dataset, folds.val, setting.class_subset, total=setting.n_val,
                         per_combo=None, rng=rng, require_all=False, proportional=True)
        test = _take_fold(dataset, folds.test, setting.class_subset, total=setting.n_test,
                          per_combo=None, rng=rng, require_all=False, proportional=True)
        return train, val, test
    train = _take_fold(dataset, folds.train, setting.class_subset,
                       total=None, per_combo=setting.n_per_combo, rng=rng, require_all=True)
    val = _take_fold(dataset, folds.val, setting.class_subset,
                     total=setting.n_val, per_combo=None, rng=rng, require_all=False)
    test = _take_fold(dataset, folds.test, setting.class_subset,
                      total=setting.n_test, per_combo=None, rng=rng, require_all=False)
    return train, val, test


def _take_fold_all(dataset: LabeledImageSet, fold_ids: set[str], combos: list[str]) -> LabeledImageSet:
    """Every fold image of the requested combos, untouched (resolution axis)."""
    wanted = set(combos)
    records = [r for r in dataset.records if r.image_id in fold_ids and r.combo_key in wanted]
    if not records:
        raise DataError("no requested combo present in the source fold")
    return LabeledImageSet(labels=list(dataset.labels), records=records,
                           no_finding=dataset.no_finding)
