"""HTTP facade over the task-load engine and telemetry storage.

Endpoints (request/response bodies use the canonical event encoding):

    POST /v1/sessions                  create a session
    POST /v1/sessions/{id}/events      ingest a telemetry batch
    POST /v1/sessions/{id}/actions     step the task engine
    GET  /v1/sessions/{id}/export      stream the stored log verbatim
    POST /v1/sessions/{id}/close       end the session
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from drowse import events as ev
from drowse import taskload as tl
from drowse.storage import GapInSequence, SessionClosed, SessionStore, UnknownSession

DEFAULT_ADDR = "127.0.0.1:8099"
DEFAULT_STORAGE_ROOT = "./sessions"


@dataclass(frozen=True)
class ServiceConfig:
    addr: str = DEFAULT_ADDR
    storage_root: str = DEFAULT_STORAGE_ROOT


def load_service_config(
    config_path: str | None = None,
    environ: dict | None = None,
) -> ServiceConfig:
    """File values overridden by SERVICE_ADDR / STORAGE_ROOT environment variables."""
    environ = os.environ if environ is None else environ
    addr = DEFAULT_ADDR
    storage_root = DEFAULT_STORAGE_ROOT
    if config_path:
        with open(config_path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        addr = doc.get("addr", addr)
        storage_root = doc.get("storage_root", storage_root)
    addr = environ.get("SERVICE_ADDR", addr)
    storage_root = environ.get("STORAGE_ROOT", storage_root)
    return ServiceConfig(addr=addr, storage_root=storage_root)


def _error(status: int, code: str, detail: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": code, "detail": detail})


_ACTION_TYPES = {
    "select_tx": lambda doc: tl.SelectTx(tx_id=str(doc["tx_id"]), now=int(doc["now"])),
    "go": lambda doc: tl.Go(now=int(doc["now"])),
    "decide": lambda doc: tl.Decide(decision=str(doc["decision"]), now=int(doc["now"])),
    "submit_credentials": lambda doc: tl.SubmitCredentials(
        username=str(doc["username"]), password=str(doc["password"]), now=int(doc["now"])
    ),
    "submit_confidence": lambda doc: tl.SubmitConfidence(
        rating=int(doc["rating"]), now=int(doc["now"])
    ),
    "submit_kss": lambda doc: tl.SubmitKss(score=int(doc["score"]), now=int(doc["now"])),
    "tick": lambda doc: tl.Tick(now=int(doc["now"])),
}


def parse_action(doc: dict) -> tl.Action:
    kind = doc.get("type")
    builder = _ACTION_TYPES.get(kind)
    if builder is None:
        raise ValueError(f"unknown action type {kind!r}")
    try:
        return builder(doc)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"bad action fields for {kind!r}: {exc}") from exc


def _tx_view(tx: ev.TransactionRecord) -> dict:
    view = tl.tx_to_dict(tx)
    view.pop("injected_error")  # the ground truth stays server-side
    return view


def _engine_view(engine: tl.TaskSession, emitted: list[ev.InputEvent]) -> dict:
    state = engine.state
    return {
        "phase": state.phase.value,
        "awaiting_kss": state.awaiting_kss,
        "pending_kss_at": state.pending_kss_at,
        "completed_tx": state.completed_tx,
        "correct_tx": state.correct_tx,
        "events": [json.loads(ev.encode_event(e)) for e in emitted],
        "transactions": [_tx_view(tx) for tx in engine.visible_transactions()],
        "active_tx_id": state.active_tx_id,
    }


def create_app(store: SessionStore) -> FastAPI:
    app = FastAPI(title="drowse ingestion service", version="0.1.0")
    app.state.store = store
    # the participant webapp is served from its own origin
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.post("/v1/sessions")
    async def create_session(request: Request):
        try:
            doc = await request.json()
        except json.JSONDecodeError:
            return _error(400, "malformed", "body must be JSON")
        subject_id = doc.get("subject_id")
        if not isinstance(subject_id, str) or not subject_id:
            return _error(422, "validation", "subject_id must be a non-empty string")
        try:
            config = tl.config_from_dict(doc.get("config", {}))
        except (ValueError, TypeError) as exc:
            return _error(422, "validation", str(exc))
        meta = store.create(subject_id, config)
        return {
            "session_id": meta.session_id,
            "subject_id": meta.subject_id,
            "started_at": meta.started_at,
        }

    @app.post("/v1/sessions/{session_id}/events")
    async def ingest_events(session_id: str, request: Request):
        try:
            doc = await request.json()
        except json.JSONDecodeError:
            return _error(400, "malformed", "body must be JSON")
        seq = doc.get("seq")
        if not isinstance(seq, int) or seq < 1:
            return _error(422, "validation", "seq must be a positive integer")
        raw_events = doc.get("events")
        if not isinstance(raw_events, list):
            return _error(422, "validation", "events must be a list")
        try:
            batch = [ev.event_from_record(r) for r in raw_events]
        except (ev.MalformedLine, ev.UnknownType, ev.DomainViolation) as exc:
            return _error(422, "validation", str(exc))
        if any(b.t < a.t for a, b in zip(batch, batch[1:])):
            return _error(422, "validation", "events within a batch must be time-ordered")
        try:
            last_seq = store.ingest_batch(session_id, seq, batch)
        except UnknownSession:
            return _error(404, "unknown_session", session_id)
        except SessionClosed:
            return _error(409, "session_closed", session_id)
        except GapInSequence as exc:
            return _error(409, "gap_in_sequence", str(exc))
        return {"last_seq": last_seq}

    @app.post("/v1/sessions/{session_id}/actions")
    async def act(session_id: str, request: Request):
        try:
            doc = await request.json()
        except json.JSONDecodeError:
            return _error(400, "malformed", "body must be JSON")
        try:
            action = parse_action(doc)
        except ValueError as exc:
            return _error(422, "validation", str(exc))
        try:
            emitted, engine = store.act(session_id, action)
        except UnknownSession:
            return _error(404, "unknown_session", session_id)
        except SessionClosed:
            return _error(409, "session_closed", session_id)
        except tl.IllegalAction as exc:
            return _error(409, "illegal_action", str(exc))
        return _engine_view(engine, emitted)

    @app.get("/v1/sessions/{session_id}/export")
    async def export_session(session_id: str):
        try:
            payload = store.export(session_id)
        except UnknownSession:
            return _error(404, "unknown_session", session_id)
        return Response(content=payload, media_type="text/plain; charset=utf-8")

    @app.post("/v1/sessions/{session_id}/close")
    async def close_session(session_id: str):
        try:
            store.close(session_id)
        except UnknownSession:
            return _error(404, "unknown_session", session_id)
        return {"session_id": session_id, "status": "closed"}

    return app


def serve(config: ServiceConfig) -> None:
    """Run the service until interrupted (the CLI `serve` subcommand)."""
    import uvicorn

    host, _, port = config.addr.rpartition(":")
    app = create_app(SessionStore(config.storage_root))
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port), log_level="warning")
