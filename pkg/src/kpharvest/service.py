"""HTTP API exposing interactive sessions to the web UI.

Sessions live in memory behind per-session locks; distinct sessions serve
concurrently, requests to one session serialize (or 409 in strict mode).
All payloads carry a "v": 1 schema version.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .corpus import CorpusIndex, make_snippets
from .errors import (
    JudgmentOrderError,
    UnknownStrategyError,
    ValidationError,
)
from .metrics import GroundTruth
from .session import (
    Session,
    apply_judgment,
    finish_session,
    next_document,
    start_session,
)
from .simulator import WorkloadEntry
from .strategies import StrategyConfig


@dataclass
class SessionHandle:
    session_id: str
    created_at: str
    strategy_name: str
    session: Session
    lock: threading.Lock


class CreateSessionBody(BaseModel):
    names: list[str]
    seed_keyphrases: list[str] = []
    strategy: str
    corpus: Optional[str] = None
    entity: Optional[str] = None


class JudgmentBody(BaseModel):
    relevant: bool
    accepted_keyphrases: list[str] = []


def _doc_payload(handle: SessionHandle, index: CorpusIndex) -> dict:
    session = handle.session
    doc_id = session.pending
    doc = index.get(doc_id)
    snippets = make_snippets(index, doc_id, session.names)
    candidates = sorted(doc.keyphrases.items(), key=lambda kv: (-kv[1], kv[0]))
    return {
        "v": 1,
        "session_id": handle.session_id,
        "doc_id": doc_id,
        "snippets": [
            {
                "doc_id": s.doc_id,
                "window_text": s.window_text,
                "mention": s.mention,
                "highlighted_keyphrases": s.highlighted_keyphrases,
            }
            for s in snippets
        ],
        "candidate_keyphrases": [{"text": k, "count": c} for k, c in candidates],
        "judged_count": len(session.judgments),
    }


def _state_payload(handle: SessionHandle) -> dict:
    session = handle.session
    return {
        "v": 1,
        "session_id": handle.session_id,
        "strategy": handle.strategy_name,
        "names": list(session.names),
        "seed_keyphrases": list(session.seed_keyphrases),
        "accepted": {k: session.accepted[k] for k in sorted(session.accepted)},
        "rejected_count": len(session.rejected),
        "judged_count": len(session.judgments),
        "trace": session.trace,
        "exhausted": session.exhausted and session.pending is None,
    }


def create_app(
    index: CorpusIndex,
    workload: Optional[list[WorkloadEntry]] = None,
    corpus_name: Optional[str] = None,
    strict_concurrency: bool = False,
    snapshot_dir: Optional[str] = None,
    ui_dir: Optional[str] = None,
) -> FastAPI:
    app = FastAPI(title="kpharvest")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    handles: dict[str, SessionHandle] = {}
    registry_lock = threading.Lock()
    truth_by_entity: dict[str, WorkloadEntry] = {}
    if workload:
        truth_by_entity = {e.entity_id: e for e in workload}

    def _find_truth(body: CreateSessionBody) -> Optional[GroundTruth]:
        if body.entity and body.entity in truth_by_entity:
            return truth_by_entity[body.entity].truth
        wanted = set(body.names)
        for entry in truth_by_entity.values():
            if set(entry.names) == wanted:
                return entry.truth
        return None

    def _error(status: int, message: str) -> JSONResponse:
        return JSONResponse(status_code=status, content={"v": 1, "error": message})

    def _locked(session_id: str):
        handle = handles.get(session_id)
        if handle is None:
            return None, _error(404, f"unknown session {session_id!r}")
        if strict_concurrency:
            if not handle.lock.acquire(blocking=False):
                return None, _error(409, "session is busy")
        else:
            handle.lock.acquire()
        return handle, None

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionBody):
        if not body.names or not any(n.strip() for n in body.names):
            return _error(422, "names must be non-empty")
        if corpus_name and body.corpus and body.corpus != corpus_name:
            return _error(422, f"unknown corpus {body.corpus!r}")
        truth = _find_truth(body)
        if body.strategy == "Ideal" and truth is None:
            return _error(422, "Ideal strategy requires a loaded workload entry")
        try:
            session = start_session(
                index,
                body.names,
                body.seed_keyphrases,
                StrategyConfig(name=body.strategy, truth=truth),
            )
        except (UnknownStrategyError, ValidationError) as exc:
            return _error(422, str(exc))
        session_id = uuid.uuid4().hex
        handle = SessionHandle(
            session_id=session_id,
            created_at=datetime.now(timezone.utc).isoformat(),
            strategy_name=body.strategy,
            session=session,
            lock=threading.Lock(),
        )
        with registry_lock:
            handles[session_id] = handle
        doc_id = next_document(session)
        payload = {"v": 1, "session_id": session_id}
        if doc_id is None:
            payload["document"] = None
            payload["exhausted"] = True
        else:
            payload["document"] = _doc_payload(handle, index)
        return payload

    @app.get("/sessions/{session_id}/current")
    def current_document(session_id: str):
        handle, err = _locked(session_id)
        if err:
            return err
        try:
            if next_document(handle.session) is None:
                return Response(status_code=204)
            return _doc_payload(handle, index)
        finally:
            handle.lock.release()

    @app.post("/sessions/{session_id}/judgment")
    def judge(session_id: str, body: JudgmentBody):
        handle, err = _locked(session_id)
        if err:
            return err
        try:
            session = handle.session
            if session.pending is None:
                return _error(409, "no pending document to judge")
            try:
                apply_judgment(
                    session,
                    session.pending,
                    body.relevant,
                    set(body.accepted_keyphrases),
                )
            except JudgmentOrderError as exc:
                return _error(409, str(exc))
            except ValidationError as exc:
                return _error(422, str(exc))
            if next_document(session) is None:
                return Response(status_code=204)
            return _doc_payload(handle, index)
        finally:
            handle.lock.release()

    @app.post("/sessions/{session_id}/finish")
    def finish(session_id: str):
        handle, err = _locked(session_id)
        if err:
            return err
        try:
            rep = finish_session(handle.session)
            payload = {
                "v": 1,
                "session_id": session_id,
                "names": list(rep.names),
                "keyphrases": rep.keyphrases,
            }
            if snapshot_dir:
                out = Path(snapshot_dir)
                out.mkdir(parents=True, exist_ok=True)
                snapshot = dict(payload)
                snapshot["trace"] = handle.session.trace
                snapshot["judged_docs"] = [
                    j.doc_id for j in handle.session.judgments
                ]
                with open(out / f"{session_id}.json", "w", encoding="utf-8") as fh:
                    json.dump(snapshot, fh, sort_keys=True, indent=1)
            return payload
        finally:
            handle.lock.release()

    @app.get("/sessions/{session_id}/state")
    def state(session_id: str):
        handle, err = _locked(session_id)
        if err:
            return err
        try:
            return _state_payload(handle)
        finally:
            handle.lock.release()

    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
