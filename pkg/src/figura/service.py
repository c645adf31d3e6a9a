"""HTTP JSON API exposing the pipeline and the dialogue manager.

Endpoints: POST /session, POST /session/{id}/message, GET /metrics,
POST /generate, GET /metaphors. Sessions live in memory; every message,
delivery, and follow-up is appended to a JSON-lines event log from which
/metrics is recomputed at call time, so restarting the server over the
same log reproduces identical metrics. Requests for distinct sessions
proceed concurrently; requests for one session serialize on its lock.
"""
from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence, Union

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .config import Config
from .dialogue import Session, advance, record_and_report, score_trigger
from .embeddings import EmbeddingStore
from .errors import DataError
from .events import Event, append_events, read_events
from .evidence import CorpusIndex
from .generator import GeneratedMetaphor
from .pipeline import forms_for, generate_metaphors, record_to_dict

API_ERROR_CODES = ("bad_request", "not_found", "conflict", "internal")


class ApiException(Exception):
    """Carried to the client as an ApiError body {code, message}."""

    def __init__(self, code: str, message: str, status: int):
        assert code in API_ERROR_CODES
        super().__init__(message)
        self.code = code
        self.message = message
        self.status = status


def bad_request(message: str) -> ApiException:
    return ApiException("bad_request", message, 400)


def not_found(message: str) -> ApiException:
    return ApiException("not_found", message, 404)


def internal(message: str) -> ApiException:
    return ApiException("internal", message, 500)


@dataclass
class ChatEngine:
    """Shared server state: artifacts, session registry, and the event log."""

    config: Config
    store: Optional[EmbeddingStore] = None
    inventory: Sequence[GeneratedMetaphor] = ()
    stopwords: frozenset = frozenset()
    corpus: Optional[CorpusIndex] = None
    pos_table: Mapping[str, str] = field(default_factory=dict)
    event_log_path: Union[str, Path] = "events.jsonl"
    templates: Optional[Mapping[str, str]] = None
    mass_nouns: Optional[frozenset] = None

    def __post_init__(self):
        self._sessions: dict[str, Session] = {}
        self._session_locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()
        self._log_lock = threading.Lock()
        self._created = 0
        self._forms_cache = {m.id: forms_for(m, self.mass_nouns) for m in self.inventory}
        self._by_id = {m.id: m for m in self.inventory}

    def ready(self) -> bool:
        return self.store is not None and len(self.inventory) > 0

    def create_session(self) -> Session:
        with self._registry_lock:
            session_id = uuid.uuid4().hex
            session = Session(id=session_id, rng_seed=self.config.seed + self._created)
            self._created += 1
            self._sessions[session_id] = session
            self._session_locks[session_id] = threading.Lock()
            return session

    def get_session(self, session_id: str) -> tuple[Session, threading.Lock]:
        with self._registry_lock:
            if session_id not in self._sessions:
                raise not_found(f"unknown session {session_id!r}")
            return self._sessions[session_id], self._session_locks[session_id]

    def append(self, events: list[Event]) -> None:
        if not events:
            return
        with self._log_lock:
            append_events(self.event_log_path, events)

    def metrics(self):
        with self._log_lock:
            events = read_events(self.event_log_path)
        return record_and_report(events, self.config.follow_up_window)

    def handle_message(self, session_id: str, text: str) -> dict:
        session, lock = self.get_session(session_id)
        with lock:
            decision = score_trigger(
                text,
                session,
                self.inventory,
                self.store,
                self.stopwords,
                threshold=self.config.trigger_threshold,
                weights=self.config.trigger_weights,
                neighbor_k=self.config.trigger_neighbor_k,
            )
            forms = None
            if decision.triggered:
                forms = self._forms_cache[decision.metaphor_id]
            elif session.state is not None:
                forms = self._forms_cache.get(session.state.metaphor_id)
            collected: list[Event] = []
            reply, _ = advance(
                session,
                text,
                decision,
                forms,
                fallback_reply=self.config.fallback_reply,
                follow_up_window=self.config.follow_up_window,
                on_event=collected.append,
                ts=time.time(),
            )
            self.append(collected)
            return {
                "text": reply,
                "triggered": decision.triggered,
                "form": decision.form,
                "state": session.state_name,
            }


def create_app(engine: ChatEngine) -> FastAPI:
    app = FastAPI(title="figura", version="0.1.0")
    app.state.engine = engine
    # the web client may be served from a different origin (static server)
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"])

    @app.exception_handler(ApiException)
    async def api_error_handler(_req: Request, exc: ApiException):
        return JSONResponse(
            status_code=exc.status, content={"code": exc.code, "message": exc.message}
        )

    @app.exception_handler(RequestValidationError)
    async def validation_handler(_req: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400, content={"code": "bad_request", "message": str(exc)}
        )

    @app.post("/session", status_code=201)
    def create_session():
        if not engine.ready():
            raise internal("server is missing its embedding store or metaphor inventory")
        session = engine.create_session()
        return {"session_id": session.id, "created_at": time.time()}

    @app.post("/session/{session_id}/message")
    def post_message(session_id: str, body: dict):
        text = body.get("text") if isinstance(body, dict) else None
        if not isinstance(text, str) or not text.strip():
            raise bad_request("body must carry a nonempty 'text' field")
        if not engine.ready():
            raise internal("server is missing its embedding store or metaphor inventory")
        return engine.handle_message(session_id, text)

    @app.get("/metrics")
    def get_metrics():
        return {"forms": engine.metrics().as_dict()}

    @app.post("/generate")
    def batch_generate(body: Optional[dict] = None):
        body = body or {}
        if engine.store is None or engine.corpus is None or not engine.pos_table:
            raise internal("generation artifacts (embeddings, corpus, POS table) not loaded")
        targets = body.get("targets") or []
        sources = body.get("sources") or []
        if not targets or not sources:
            raise bad_request("body must carry nonempty 'targets' and 'sources' lists")
        pos = body.get("pos")
        if isinstance(pos, str):
            pos = [pos]
        try:
            records = generate_metaphors(
                engine.store,
                engine.corpus,
                engine.pos_table,
                targets,
                sources,
                engine.stopwords,
                engine.config,
                pos_filter=pos,
                limit=body.get("limit"),
                templates=engine.templates,
                mass_nouns=engine.mass_nouns,
            )
        except DataError as exc:
            raise bad_request(str(exc)) from exc
        return {"metaphors": [record_to_dict(r) for r in records]}

    @app.get("/metaphors")
    def list_metaphors(target: Optional[str] = None, pos: Optional[str] = None):
        out = []
        for m in engine.inventory:
            if target is not None and m.triplet.target != target.lower():
                continue
            if pos is not None and m.triplet.pos != pos:
                continue
            out.append(
                {
                    "id": m.id,
                    "target": m.triplet.target,
                    "source": m.triplet.source,
                    "connector": m.triplet.connector,
                    "pos": m.triplet.pos,
                    "text": m.text,
                }
            )
        return {"metaphors": out}

    return app
