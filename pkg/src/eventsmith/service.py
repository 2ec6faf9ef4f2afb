"""HTTP session service consumed by the web UI and scripts.

Sessions live in memory; every accepted mutation is appended to a per-session
JSONL action log on disk before the response goes out, and a restart recovers
all sessions by replaying those logs. Requests to one session are serialized
behind a per-session lock. State-changing requests may carry a request_id;
retries with the same id return the original response without reapplying.
"""

from __future__ import annotations

import logging
import threading
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from .backends.base import BackendFailure, GeneratorBackend
from .session import (
    ActionKind,
    CorruptLog,
    InvalidAction,
    Session,
    SessionConfig,
    SessionFinished,
    UserAction,
    append_log_record,
    apply_action,
    current_metrics,
    propose_candidates,
    read_log,
    replay_log,
    start_session,
)

logger = logging.getLogger(__name__)


class CreateSessionRequest(BaseModel):
    seed: str = ""
    variant: str = "qgelm"
    time_budget: Optional[float] = None
    seed_rng: int = 0
    request_id: Optional[str] = None


class EntityRequest(BaseModel):
    entity: Optional[str] = None
    request_id: Optional[str] = None


class ActionRequest(BaseModel):
    kind: str
    index: Optional[int] = None
    step: Optional[int] = None
    request_id: Optional[str] = None


class SessionStore:
    def __init__(
        self,
        backend: GeneratorBackend,
        log_dir: str | Path,
        default_config: SessionConfig = SessionConfig(),
    ) -> None:
        self.backend = backend
        self.log_dir = Path(log_dir)
        self.log_dir.mkdir(parents=True, exist_ok=True)
        self.default_config = default_config
        self.sessions: dict[str, Session] = {}
        self.locks: dict[str, threading.Lock] = {}
        self.responses: dict[str, dict[str, dict]] = {}
        self.create_responses: dict[str, dict] = {}
        self._store_lock = threading.Lock()

    def recover(self) -> int:
        """Rebuild sessions from the on-disk action logs."""
        recovered = 0
        for log_path in sorted(self.log_dir.glob("*.jsonl")):
            try:
                records = read_log(log_path)
                session = replay_log(records, self.backend, self.default_config)
            except (CorruptLog, SessionFinished, InvalidAction, BackendFailure) as exc:
                logger.warning("could not recover %s: %s", log_path.name, exc)
                continue
            self._register(session)
            recovered += 1
        return recovered

    def _register(self, session: Session) -> None:
        with self._store_lock:
            self.sessions[session.session_id] = session
            self.locks[session.session_id] = threading.Lock()
            self.responses[session.session_id] = {}

    def lock_for(self, session_id: str) -> threading.Lock:
        with self._store_lock:
            lock = self.locks.get(session_id)
        if lock is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        return lock

    def get(self, session_id: str) -> Session:
        session = self.sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        return session

    def log_path(self, session_id: str) -> Path:
        return self.log_dir / f"{session_id}.jsonl"

    def flush_new_records(self, session: Session, already_logged: int) -> None:
        path = self.log_path(session.session_id)
        for record in session.log[already_logged:]:
            append_log_record(record, path)


def session_view(session: Session) -> dict:
    children: dict[Optional[int], list[int]] = {}
    for node_id, node in sorted(session.nodes.items()):
        children.setdefault(node.parent, []).append(node_id)

    def node_view(node_id: int) -> dict:
        node = session.nodes[node_id]
        return {
            "node_id": node.node_id,
            "step": node.step_index,
            "event": node.event,
            "children": [node_view(child) for child in children.get(node_id, [])],
        }

    return {
        "session_id": session.session_id,
        "state": session.state.value,
        "variant": session.variant,
        "step_index": session.nodes[session.cursor].step_index,
        "cursor": session.cursor,
        "candidates": [
            {"index": i, "text": text} for i, text in enumerate(session.pending_candidates)
        ],
        "tree": node_view(0),
        "metrics": current_metrics(session).to_dict(),
        "seconds_remaining": session.seconds_remaining(),
    }


def create_app(
    backend: GeneratorBackend,
    log_dir: str | Path,
    default_config: SessionConfig = SessionConfig(),
    recover: bool = True,
) -> FastAPI:
    app = FastAPI(title="eventsmith session service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    store = SessionStore(backend, log_dir, default_config)
    if recover:
        count = store.recover()
        if count:
            logger.info("recovered %d session(s) from %s", count, log_dir)
    app.state.store = store

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionRequest) -> dict:
        if body.request_id is not None and body.request_id in store.create_responses:
            return store.create_responses[body.request_id]
        if not body.seed.strip():
            raise HTTPException(status_code=400, detail="seed event must be non-empty")
        base = store.default_config
        config = SessionConfig(
            time_budget=body.time_budget if body.time_budget is not None else base.time_budget,
            rng_seed=body.seed_rng,
            candidates_per_step=base.candidates_per_step,
            samples_per_question=base.samples_per_question,
            dedupe_retries=base.dedupe_retries,
            decode=base.decode,
            clock=base.clock,
        )
        fitted = getattr(store.backend, "variant", None)
        if fitted is not None and fitted != body.variant:
            logger.warning(
                "session variant %r differs from the backend's fitted variant %r",
                body.variant,
                fitted,
            )
        try:
            session = start_session(body.seed, body.variant, store.backend, config)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        except BackendFailure as exc:
            raise HTTPException(status_code=503, detail=str(exc)) from exc
        store._register(session)
        store.flush_new_records(session, 0)
        view = session_view(session)
        if body.request_id is not None:
            store.create_responses[body.request_id] = view
        return view

    @app.post("/sessions/{session_id}/entity")
    def post_entity(session_id: str, body: EntityRequest) -> dict:
        lock = store.lock_for(session_id)
        with lock:
            cached = store.responses[session_id].get(body.request_id or "")
            if body.request_id is not None and cached is not None:
                return cached
            session = store.get(session_id)
            logged = len(session.log)
            try:
                propose_candidates(session, body.entity)
            except SessionFinished as exc:
                raise HTTPException(status_code=410, detail=str(exc)) from exc
            except InvalidAction as exc:
                raise HTTPException(status_code=409, detail=str(exc)) from exc
            except BackendFailure as exc:
                raise HTTPException(status_code=503, detail=str(exc)) from exc
            store.flush_new_records(session, logged)
            view = session_view(session)
            if body.request_id is not None:
                store.responses[session_id][body.request_id] = view
            return view

    @app.post("/sessions/{session_id}/actions")
    def post_action(session_id: str, body: ActionRequest) -> dict:
        try:
            kind = ActionKind(body.kind)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=f"unknown action {body.kind!r}") from exc
        action = UserAction(kind=kind, index=body.index, step=body.step)
        lock = store.lock_for(session_id)
        with lock:
            cached = store.responses[session_id].get(body.request_id or "")
            if body.request_id is not None and cached is not None:
                return cached
            session = store.get(session_id)
            logged = len(session.log)
            try:
                apply_action(session, action)
            except SessionFinished as exc:
                raise HTTPException(status_code=410, detail=str(exc)) from exc
            except InvalidAction as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
            except BackendFailure as exc:
                raise HTTPException(status_code=503, detail=str(exc)) from exc
            store.flush_new_records(session, logged)
            view = session_view(session)
            if body.request_id is not None:
                store.responses[session_id][body.request_id] = view
            return view

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str) -> dict:
        lock = store.lock_for(session_id)
        with lock:
            return session_view(store.get(session_id))

    @app.get("/sessions/{session_id}/metrics")
    def get_metrics(session_id: str) -> dict:
        lock = store.lock_for(session_id)
        with lock:
            return current_metrics(store.get(session_id)).to_dict()

    return app
