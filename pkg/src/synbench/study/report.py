"""Study-level reporting over completed sessions."""

from __future__ import annotations

import numpy as np

from ..analysis.stats import StatsError, confusion_and_accuracy, wilcoxon_signed_rank_vs
from .schemas import ReaderReport, StudyReport
from .store import ReaderSession, StudyError

MIN_READERS_FOR_TEST = 6


def session_report(session: ReaderSession) -> ReaderReport:
    if session.state != "complete":
        raise StudyError(f"session {session.session_id} is incomplete")
    confusion = confusion_and_accuracy(session.verdicts, session.truth_map())
    return ReaderReport(
        session_id=session.session_id,
        reader_id=session.reader_id,
        TR=confusion.tr,
        FR=confusion.fr,
        TS=confusion.ts,
        FS=confusion.fs,
        acc=confusion.acc,
    )


def study_report(sessions: list[ReaderSession]) -> StudyReport:
    """Per-reader confusions plus the accuracy distribution. The signed-rank
    test against chance only runs from six readers upward; below that only
    the accuracies are reported."""
    if not sessions:
        raise StudyError("no sessions given")
    readers = [session_report(s) for s in sessions]
    accuracies = [r.acc for r in readers]
    p = None
    if len(readers) >= MIN_READERS_FOR_TEST:
        try:
            p = wilcoxon_signed_rank_vs(accuracies, 0.5)
        except StatsError:
            p = None  # every accuracy exactly at chance: test undefined
    return StudyReport(
        readers=readers,
        accuracies=accuracies,
        mean_acc=float(np.mean(accuracies)),
        std_acc=float(np.std(accuracies)),
        n_readers=len(readers),
        wilcoxon_p=p,
    )
