"""HTTP facade over the orchestrator: sessions, step streams, citations, export.

Concurrency contract: one in-flight step per session (409 otherwise), and a
service-wide cap on simultaneous generation work; requests beyond the cap get
an explicit busy response instead of queueing behind someone else's decode.
"""

import json
import threading
from collections import defaultdict

from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import PlainTextResponse, StreamingResponse
from pydantic import BaseModel

from ..errors import (
    CandidateError,
    ContextOverflowError,
    ContractError,
    UsageError,
    ValidationError,
)
from ..orchestrator import PAUSED, DecodeConfig, Orchestrator
from .store import ApiSession, SessionStore


class CreateSessionBody(BaseModel):
    title: str
    abstract: str = ""
    section: str = "introduction"
    config: dict = {}
    owner: str = ""


class StepBody(BaseModel):
    max_new_tokens: int | None = None


class CitationBody(BaseModel):
    action: str
    ref_id: str | None = None
    external: bool = False


def _http(status: int, exc: Exception) -> HTTPException:
    return HTTPException(status_code=status, detail=str(exc))


def create_app(orch: Orchestrator, store: SessionStore, generation_cap: int = 2) -> FastAPI:
    app = FastAPI(title="scopilot service")
    session_locks: dict[str, threading.Lock] = defaultdict(threading.Lock)
    locks_guard = threading.Lock()
    budget = threading.BoundedSemaphore(generation_cap)

    def lock_for(session_id: str) -> threading.Lock:
        with locks_guard:
            return session_locks[session_id]

    def load_or_404(session_id: str) -> ApiSession:
        try:
            session = store.get(session_id)
        except ValidationError as exc:
            raise _http(404, exc)
        if session is None:
            raise HTTPException(status_code=404, detail=f"no session {session_id!r}")
        return session

    @app.get("/v1/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/v1/sessions", status_code=201)
    def create_session(body: CreateSessionBody):
        try:
            decode = DecodeConfig(**body.config) if body.config else None
            state = orch.new_session(
                body.title, abstract=body.abstract, section=body.section, decode=decode
            )
        except (ValidationError, TypeError) as exc:
            raise _http(422, exc)
        session = ApiSession.fresh(state, owner=body.owner)
        store.save(session)
        return {"session_id": state.session_id, "status": state.status}

    @app.get("/v1/sessions/{session_id}")
    def get_session(session_id: str):
        session = load_or_404(session_id)
        state = session.state
        view = session.to_json()
        view["text"] = orch.export(state, "tex")
        view["candidates"] = (
            orch.describe_candidates(state.pending) if state.status == PAUSED else None
        )
        return view

    @app.post("/v1/sessions/{session_id}/steps")
    def step_session(session_id: str, body: StepBody):
        session = load_or_404(session_id)
        if session.state.status == PAUSED:
            raise HTTPException(
                status_code=409, detail="session is paused; resolve the citation first"
            )
        lock = lock_for(session_id)
        if not lock.acquire(blocking=False):
            raise HTTPException(status_code=409, detail="a step is already running")
        if not budget.acquire(blocking=False):
            lock.release()
            raise HTTPException(status_code=503, detail="busy: generation capacity reached")

        def stream():
            try:
                for event in orch.step(session.state, body.max_new_tokens):
                    yield json.dumps(event.to_json()) + "\n"
                store.save(session)
            finally:
                budget.release()
                lock.release()

        return StreamingResponse(stream(), media_type="application/x-ndjson")

    @app.post("/v1/sessions/{session_id}/citation")
    def resolve_citation(session_id: str, body: CitationBody):
        session = load_or_404(session_id)
        lock = lock_for(session_id)
        if not lock.acquire(blocking=False):
            raise HTTPException(status_code=409, detail="a step is already running")
        try:
            if body.external:
                if body.action != "accept":
                    raise _http(422, UsageError("external resolution only supports accept"))
                event = orch.accept_external(session.state, body.ref_id)
            else:
                event = orch.resolve_citation(session.state, body.action, body.ref_id)
            store.save(session)
        except (ContractError, ContextOverflowError) as exc:
            raise _http(409, exc)
        except (CandidateError, UsageError, ValidationError) as exc:
            raise _http(422, exc)
        finally:
            lock.release()
        return {
            "status": session.state.status,
            "event": event.to_json(),
            "accepted": list(session.state.accepted),
        }

    @app.get("/v1/sessions/{session_id}/export")
    def export_session(session_id: str, format: str = Query(...)):
        session = load_or_404(session_id)
        try:
            doc = orch.export(session.state, format)
        except UsageError as exc:
            raise _http(422, exc)
        return PlainTextResponse(doc)

    return app
