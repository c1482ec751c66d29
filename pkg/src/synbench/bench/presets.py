"""Full-scale benchmark presets for the two public-dataset configurations.

Each row records the published benchmark composition: how many labels and
label combinations stay in play, the fold sizes, and the per-combination
training count. Because the concrete label combinations depend on the
prepared pool, a row is turned into a concrete setting by picking the
most frequent combinations from the pool's training fold.

Desk-scale presets mirror the same axes on the procedural toy corpus.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from ..data.records import LabeledImageSet
from ..data.splits import FoldAssignment
from .plan import ClassifierConfig, ExperimentPlan, GanConfig, SettingConfig


@dataclass(frozen=True)
class BenchmarkRow:
    axis: str
    n_combos: int
    n_train: int
    n_valtest: int
    n_per_combo: int  # 0 on the resolution axis (natural pool proportions)
    resolution: int
    n_seeds_override: int | None = None


# chest radiographs -----------------------------------------------------------

CHEST_CLASSES_32 = [
    BenchmarkRow("classes", 20, 29_000, 3_800, 1_450, 32),
    BenchmarkRow("classes", 15, 24_000, 2_850, 1_600, 32),
    BenchmarkRow("classes", 10, 20_000, 1_900, 2_000, 32),
    BenchmarkRow("classes", 6, 13_800, 1_140, 2_300, 32),
    BenchmarkRow("classes", 4, 15_600, 760, 3_900, 32),
    BenchmarkRow("classes", 2, 12_600, 380, 6_300, 32),
]

CHEST_SAMPLES_32 = [
    BenchmarkRow("samples", 3, 17_850, 2_250, 5_950, 32),
    BenchmarkRow("samples", 3, 13_500, 2_250, 4_500, 32),
    BenchmarkRow("samples", 3, 9_000, 2_250, 3_000, 32),
    BenchmarkRow("samples", 3, 4_500, 2_250, 1_500, 32),
    BenchmarkRow("samples", 3, 3_000, 2_250, 1_000, 32),
    BenchmarkRow("samples", 3, 1_500, 2_250, 500, 32),
    BenchmarkRow("samples", 3, 1_200, 2_250, 400, 32),
    BenchmarkRow("samples", 3, 600, 2_250, 200, 32),
]

CHEST_RESOLUTION = [
    BenchmarkRow("resolution", 138, 117_168, 4_000, 0, 32),
    BenchmarkRow("resolution", 138, 117_168, 4_000, 0, 64),
    BenchmarkRow("resolution", 138, 117_168, 4_000, 0, 128),
    # higher-resolution continuations of the axis; the 512px cell is a
    # single training run
    BenchmarkRow("resolution", 138, 117_168, 4_000, 0, 256),
    BenchmarkRow("resolution", 138, 117_168, 4_000, 0, 512, n_seeds_override=1),
]

# brain CT scans --------------------------------------------------------------

CT_CLASSES_32 = [
    BenchmarkRow("classes", 10, 25_000, 3_000, 2_500, 32),
    BenchmarkRow("classes", 8, 24_960, 2_400, 3_120, 32),
    BenchmarkRow("classes", 6, 25_020, 1_800, 4_170, 32),
    BenchmarkRow("classes", 4, 25_000, 1_200, 6_250, 32),
    BenchmarkRow("classes", 2, 25_000, 600, 12_500, 32),
]

CT_SAMPLES_32 = [
    BenchmarkRow("samples", 6, 32_400, 3_000, 5_400, 32),
    BenchmarkRow("samples", 6, 27_000, 3_000, 4_500, 32),
    BenchmarkRow("samples", 6, 18_000, 3_000, 3_000, 32),
    BenchmarkRow("samples", 6, 9_000, 3_000, 1_500, 32),
    BenchmarkRow("samples", 6, 6_000, 3_000, 1_000, 32),
    BenchmarkRow("samples", 6, 3_000, 3_000, 500, 32),
    BenchmarkRow("samples", 6, 1_800, 3_000, 300, 32),
    BenchmarkRow("samples", 6, 600, 3_000, 100, 32),
]

CT_RESOLUTION = [
    BenchmarkRow("resolution", 20, 117_168, 4_000, 0, 32),
    BenchmarkRow("resolution", 20, 117_168, 4_000, 0, 64),
    BenchmarkRow("resolution", 20, 117_168, 4_000, 0, 128),
    BenchmarkRow("resolution", 20, 117_168, 4_000, 0, 256),
]

PRESET_ROWS = {
    "chest-classes": CHEST_CLASSES_32,
    "chest-samples": CHEST_SAMPLES_32,
    "chest-resolution": CHEST_RESOLUTION,
    "ct-classes": CT_CLASSES_32,
    "ct-samples": CT_SAMPLES_32,
    "ct-resolution": CT_RESOLUTION,
}


def top_combos(pool: LabeledImageSet, folds: FoldAssignment, k: int) -> list[str]:
    """The k most frequent label combinations in the training fold."""
    counts = Counter(
        rec.combo_key for rec in pool.records if rec.image_id in folds.train
    )
    if len(counts) < k:
        raise ValueError(f"pool has {len(counts)} combos, preset row needs {k}")
    return [combo for combo, _ in counts.most_common(k)]


def settings_from_rows(
    rows: list[BenchmarkRow],
    pool: LabeledImageSet,
    folds: FoldAssignment,
    prefix: str,
) -> list[SettingConfig]:
    out = []
    for i, row in enumerate(rows):
        subset = top_combos(pool, folds, row.n_combos)
        per_combo = row.n_per_combo
        if row.axis == "resolution":
            # natural pool proportions; per-combo count is informational
            per_combo = max(1, row.n_train // row.n_combos)
        out.append(SettingConfig(
            name=f"{prefix}-{i:02d}-{row.n_combos}c-{row.n_per_combo or 'pool'}s-{row.resolution}px",
            axis=row.axis,
            class_subset=subset,
            n_per_combo=per_combo,
            n_val=row.n_valtest,
            n_test=row.n_valtest,
            resolution=row.resolution,
            n_seeds_override=row.n_seeds_override,
        ))
    return out


def full_scale_plan(
    preset: str,
    pool_dir: str,
    pool: LabeledImageSet,
    folds: FoldAssignment,
    n_seeds: int = 4,
    models: list[str] | None = None,
) -> ExperimentPlan:
    """Full-scale plan for one published axis; training magnitudes follow the
    full-scale schedule (7M-image floor, 400k-image evaluation interval)."""
    rows = PRESET_ROWS[preset]
    settings = settings_from_rows(rows, pool, folds, prefix=preset)
    extrema = None
    if rows[0].axis in ("classes", "samples") and len(settings) >= 2:
        extrema = (settings[0].name, settings[-1].name)
        if rows[0].axis == "samples":
            extrema = (settings[-1].name, settings[0].name)  # fewest samples is harder
    return ExperimentPlan(
        name=preset,
        axis=rows[0].axis,
        pool=pool_dir,
        models=models or ["cpd", "prog"],
        n_seeds=n_seeds,
        settings=settings,
        gan=GanConfig(preset="full", max_channels=512, latent_dim=512),
        classifier=ClassifierConfig(),
        extrema=extrema,
    )
