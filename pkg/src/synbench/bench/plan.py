"""Declarative experiment plans.

A plan fixes one benchmark axis and sweeps it over a list of settings for a
set of models and seeds. Plans are YAML files validated against the pydantic
schema below; presets carry both desk-scale and full-scale magnitudes.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Literal, Optional

import yaml
from pydantic import BaseModel, Field, field_validator, model_validator

from ..classifier.protocol import ClassifierProtocol
from ..data.splits import BenchmarkSetting
from ..training.loop import TrainSchedule, desk_schedule, full_scale_schedule

MODELS = ("cpd", "prog")


class SettingConfig(BaseModel):
    name: str
    axis: Literal["classes", "samples", "resolution"]
    class_subset: list[str] = Field(min_length=1)
    n_per_combo: int = Field(gt=0)
    n_val: int = Field(gt=0)
    n_test: int = Field(gt=0)
    resolution: int
    n_seeds_override: Optional[int] = Field(default=None, ge=1)

    def to_setting(self) -> BenchmarkSetting:
        return BenchmarkSetting(
            axis=self.axis,
            class_subset=list(self.class_subset),
            n_per_combo=self.n_per_combo,
            n_train=self.n_per_combo * len(self.class_subset),
            n_val=self.n_val,
            n_test=self.n_test,
            resolution=self.resolution,
            name=self.name,
        )


class GanConfig(BaseModel):
    preset: Literal["desk", "full"] = "desk"
    overrides: dict = Field(default_factory=dict)
    max_channels: int = Field(default=128, gt=0)
    latent_dim: int = Field(default=64, gt=0)

    def schedule(self, seed: int) -> TrainSchedule:
        factory = desk_schedule if self.preset == "desk" else full_scale_schedule
        return factory(**{**self.overrides, "seed": seed})


class ClassifierConfig(BaseModel):
    overrides: dict = Field(default_factory=dict)

    def protocol(self, seed: int) -> ClassifierProtocol:
        return ClassifierProtocol(**{**self.overrides, "seed": seed})


class ExperimentPlan(BaseModel):
    version: Literal[1] = 1
    name: str
    axis: Literal["classes", "samples", "resolution"]
    pool: str  # prepared data directory (manifest + fold column)
    models: list[Literal["cpd", "prog"]] = Field(min_length=1)
    n_seeds: int = Field(ge=4)  # repetition floor for the statistics
    seed: int = 1
    settings: list[SettingConfig] = Field(min_length=1)
    gan: GanConfig = Field(default_factory=GanConfig)
    classifier: ClassifierConfig = Field(default_factory=ClassifierConfig)
    extrema: Optional[tuple[str, str]] = None  # (harder, easier) setting names

    @field_validator("models")
    @classmethod
    def _unique_models(cls, v):
        if len(set(v)) != len(v):
            raise ValueError("duplicate models in plan")
        return v

    @model_validator(mode="after")
    def _single_axis_variation(self):
        names = [s.name for s in self.settings]
        if len(set(names)) != len(names):
            raise ValueError("setting names must be unique")
        for s in self.settings:
            if s.axis != self.axis:
                raise ValueError(f"setting {s.name} varies axis {s.axis}, plan is {self.axis}")
        if self.axis in ("classes", "samples"):
            resolutions = {s.resolution for s in self.settings}
            if len(resolutions) != 1:
                raise ValueError("resolution must stay constant off the resolution axis")
        if self.axis == "samples":
            subsets = {tuple(s.class_subset) for s in self.settings}
            if len(subsets) != 1:
                raise ValueError("class_subset must stay constant on the samples axis")
        if self.axis == "resolution":
            subsets = {tuple(s.class_subset) for s in self.settings}
            if len(subsets) != 1:
                raise ValueError("class_subset must stay constant on the resolution axis")
        if self.extrema is not None:
            known = set(names)
            missing = [n for n in self.extrema if n not in known]
            if missing:
                raise ValueError(f"extrema refer to unknown settings: {missing}")
        return self

    def seeds_for(self, setting: SettingConfig) -> list[int]:
        n = setting.n_seeds_override or self.n_seeds
        return list(range(1, n + 1))

    def canonical_json(self) -> str:
        return json.dumps(self.model_dump(), sort_keys=True, separators=(",", ":"))

    def content_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()[:12]


def load_plan(path: str | Path) -> ExperimentPlan:
    with open(path) as fh:
        raw = yaml.safe_load(fh)
    return ExperimentPlan.model_validate(raw)


def save_plan(plan: ExperimentPlan, path: str | Path) -> None:
    with open(path, "w") as fh:
        yaml.safe_dump(plan.model_dump(), fh, sort_keys=False)
