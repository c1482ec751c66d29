"""Blinded reader-study HTTP service.

Pools of PNGs live under <data_root>/pools/<modality>/<resolution>/{real,synthetic}/.
Sessions persist under <data_root>/sessions/. Images are re-encoded before
serving so no filename, path, or metadata from the pools ever reaches the
client; ground truth unlocks only through the report endpoints after all 100
verdicts are in.
"""

from __future__ import annotations

import hashlib
import io
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Query, Response
from fastapi.staticfiles import StaticFiles
from PIL import Image

from ..analysis.stats import StatsError
from .report import study_report as build_study_report
from .report import session_report
from .schemas import (
    CreateSessionRequest,
    CreateSessionResponse,
    ReaderReport,
    SessionStatus,
    StudyReport,
    VerdictRequest,
    VerdictResponse,
)
from .store import N_ITEMS, SessionStore, StudyError, create_session


def _pool_paths(data_root: Path, modality: str, resolution: int) -> tuple[list[Path], list[Path]]:
    base = data_root / "pools" / modality / str(resolution)
    real = sorted((base / "real").glob("*.png"))
    syn = sorted((base / "synthetic").glob("*.png"))
    if not real or not syn:
        raise StudyError(f"no pools under {base}")
    return real, syn


def _derived_seed(server_seed: int, req: CreateSessionRequest, n_existing: int) -> int:
    key = f"{server_seed}:{req.reader_id}:{req.modality}:{req.resolution}:{n_existing}"
    return int.from_bytes(hashlib.sha256(key.encode()).digest()[:4], "little")


def create_app(data_root: str | Path, seed: int = 0, ui_dir: str | Path | None = None) -> FastAPI:
    data_root = Path(data_root)
    store = SessionStore(data_root / "sessions")
    app = FastAPI(title="reader-study service")

    @app.post("/sessions", response_model=CreateSessionResponse, status_code=201)
    def new_session(req: CreateSessionRequest):
        try:
            real, syn = _pool_paths(data_root, req.modality, req.resolution)
            session_seed = req.seed if req.seed is not None else _derived_seed(
                seed, req, len(store.list_sessions())
            )
            session = create_session(real, syn, req.reader_id, session_seed,
                                     modality=req.modality, resolution=req.resolution)
            store.save_new(session)
        except StudyError as err:
            raise HTTPException(status_code=400, detail=str(err))
        return CreateSessionResponse(session_id=session.session_id, n_items=len(session.items))

    def _load(session_id: str):
        try:
            return store.load(session_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")

    @app.get("/sessions/{session_id}", response_model=SessionStatus)
    def session_status(session_id: str):
        session = _load(session_id)
        return SessionStatus(
            session_id=session.session_id,
            n_items=len(session.items),
            answered=session.answered,
            next_index=session.next_index(),
            state=session.state,
        )

    @app.get("/sessions/{session_id}/items/{index}")
    def get_item(session_id: str, index: int):
        session = _load(session_id)
        if not 0 <= index < len(session.items):
            raise HTTPException(status_code=404, detail=f"item {index} out of range")
        item = session.items[index]
        # strip source metadata: decode to pixels, re-encode fresh
        with Image.open(item.image_path) as img:
            arr = np.asarray(img.convert("L"), dtype=np.uint8)
        buf = io.BytesIO()
        Image.fromarray(arr, mode="L").save(buf, format="PNG")
        headers = {
            "X-Item-Index": str(index),
            "X-Items-Total": str(len(session.items)),
            "X-Answered": str(session.answered),
            "X-Session-State": session.state,
            "Cache-Control": "no-store",
        }
        return Response(content=buf.getvalue(), media_type="image/png", headers=headers)

    @app.post("/sessions/{session_id}/items/{index}/verdict", response_model=VerdictResponse)
    def post_verdict(session_id: str, index: int, body: VerdictRequest):
        _load(session_id)
        try:
            session = store.record_verdict(session_id, index, body.verdict)
        except KeyError as err:
            raise HTTPException(status_code=404, detail=str(err))
        except StudyError as err:
            raise HTTPException(status_code=409, detail=str(err))
        return VerdictResponse(accepted=True, answered=session.answered, state=session.state)

    @app.get("/sessions/{session_id}/report", response_model=ReaderReport)
    def get_report(session_id: str):
        session = _load(session_id)
        if session.state != "complete":
            raise HTTPException(status_code=403,
                                detail=f"session incomplete ({session.answered}/{N_ITEMS})")
        return session_report(session)

    @app.get("/study/report", response_model=StudyReport)
    def get_study_report(session_ids: str = Query(..., description="comma-separated ids")):
        ids = [s for s in session_ids.split(",") if s]
        if not ids:
            raise HTTPException(status_code=400, detail="no session ids given")
        sessions = [_load(sid) for sid in ids]
        incomplete = [s.session_id for s in sessions if s.state != "complete"]
        if incomplete:
            raise HTTPException(status_code=403, detail=f"incomplete sessions: {incomplete}")
        try:
            return build_study_report(sessions)
        except StatsError as err:
            raise HTTPException(status_code=400, detail=str(err))

    if ui_dir is not None and Path(ui_dir).exists():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")
    return app
