"""Request/response models for the reader-study HTTP API.

Nothing in any pre-completion payload may reveal whether an item is real or
synthetic: item identifiers are opaque tokens, image bytes are re-encoded
PNGs, and truth stays server-side until the session report unlocks.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field

Verdict = Literal["real", "synthetic"]


class CreateSessionRequest(BaseModel):
    reader_id: str = Field(min_length=1, max_length=128)
    modality: str = Field(min_length=1, max_length=64)
    resolution: int = Field(gt=0)
    seed: Optional[int] = None  # server picks one when absent


class CreateSessionResponse(BaseModel):
    session_id: str
    n_items: int


class SessionStatus(BaseModel):
    session_id: str
    n_items: int
    answered: int
    next_index: Optional[int]  # first unanswered item, None when complete
    state: Literal["open", "complete"]


class VerdictRequest(BaseModel):
    verdict: Verdict


class VerdictResponse(BaseModel):
    accepted: bool
    answered: int
    state: Literal["open", "complete"]


class ReaderReport(BaseModel):
    session_id: str
    reader_id: str
    TR: int
    FR: int
    TS: int
    FS: int
    acc: float


class StudyReport(BaseModel):
    readers: list[ReaderReport]
    accuracies: list[float]
    mean_acc: float
    std_acc: float
    n_readers: int
    wilcoxon_p: Optional[float] = None  # present from 6 readers upward


class ApiError(BaseModel):
    detail: str
