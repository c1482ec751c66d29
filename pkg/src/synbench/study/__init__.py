from .client import StudyClient
from .report import session_report, study_report
from .schemas import (
    CreateSessionRequest,
    CreateSessionResponse,
    ReaderReport,
    SessionStatus,
    StudyReport,
    VerdictRequest,
    VerdictResponse,
)
from .service import create_app
from .store import N_ITEMS, ReaderSession, SessionStore, StudyError, create_session

__all__ = [
    "CreateSessionRequest",
    "CreateSessionResponse",
    "N_ITEMS",
    "ReaderReport",
    "ReaderSession",
    "SessionStatus",
    "SessionStore",
    "StudyClient",
    "StudyError",
    "StudyReport",
    "VerdictRequest",
    "VerdictResponse",
    "create_app",
    "create_session",
    "session_report",
    "study_report",
]
