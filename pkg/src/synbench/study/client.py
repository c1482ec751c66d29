"""Thin scripted client for the reader-study API.

Drives a full session the way the browser UI does: fetch the next item,
submit a verdict, repeat, then pull the report. Strategies exist for smoke
runs and controls (a constant-verdict reader must land at accuracy 0.5).
"""

from __future__ import annotations

import numpy as np

from .schemas import CreateSessionResponse, ReaderReport, SessionStatus, VerdictResponse


class StudyClient:
    """Works against any httpx-compatible client (live server or test app)."""

    def __init__(self, http, base_url: str = ""):
        self.http = http
        self.base = base_url.rstrip("/")

    def _check(self, response, expect: int = 200):
        if response.status_code != expect:
            raise RuntimeError(f"{response.request.method} {response.request.url} -> "
                               f"{response.status_code}: {response.text}")
        return response

    def create_session(self, reader_id: str, modality: str, resolution: int,
                       seed: int | None = None) -> CreateSessionResponse:
        payload = {"reader_id": reader_id, "modality": modality, "resolution": resolution}
        if seed is not None:
            payload["seed"] = seed
        r = self._check(self.http.post(f"{self.base}/sessions", json=payload), expect=201)
        return CreateSessionResponse.model_validate(r.json())

    def status(self, session_id: str) -> SessionStatus:
        r = self._check(self.http.get(f"{self.base}/sessions/{session_id}"))
        return SessionStatus.model_validate(r.json())

    def fetch_item(self, session_id: str, index: int) -> bytes:
        r = self._check(self.http.get(f"{self.base}/sessions/{session_id}/items/{index}"))
        return r.content

    def submit(self, session_id: str, index: int, verdict: str) -> VerdictResponse:
        r = self._check(
            self.http.post(f"{self.base}/sessions/{session_id}/items/{index}/verdict",
                           json={"verdict": verdict})
        )
        return VerdictResponse.model_validate(r.json())

    def report(self, session_id: str) -> ReaderReport:
        r = self._check(self.http.get(f"{self.base}/sessions/{session_id}/report"))
        return ReaderReport.model_validate(r.json())

    def run_session(self, reader_id: str, modality: str, resolution: int,
                    strategy: str = "random", seed: int | None = None,
                    rng_seed: int = 0) -> ReaderReport:
        """Complete a session start to finish with a scripted strategy:
        'random', 'all-real', or 'all-synthetic'."""
        created = self.create_session(reader_id, modality, resolution, seed=seed)
        rng = np.random.default_rng(rng_seed)
        while True:
            status = self.status(created.session_id)
            if status.state == "complete":
                break
            index = status.next_index
            self.fetch_item(created.session_id, index)
            if strategy == "all-real":
                verdict = "real"
            elif strategy == "all-synthetic":
                verdict = "synthetic"
            else:
                verdict = "real" if rng.random() < 0.5 else "synthetic"
            self.submit(created.session_id, index, verdict)
        return self.report(created.session_id)
