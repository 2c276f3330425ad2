"""Durable flat-file session storage.

One append-only ``<session_id>.session.jsonl`` log per session plus a
``<session_id>.meta.json`` sidecar holding status, batch sequencing, and the
task-engine snapshot.

Appends follow a pending/commit protocol so a process kill at any point
yields exactly-once batch semantics:

  1. meta written with a ``pending`` marker (what is about to be appended)
  2. event lines appended in a single buffered write, fsynced
  3. meta committed (pending cleared, counters advanced)

Recovery compares the actual complete-line count against the meta: a pending
append either landed fully (committed) or not at all (discarded, client will
resend).  A physically torn final line (no trailing newline) is dropped and
reported.
"""

from __future__ import annotations

import json
import logging
import os
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone

from drowse import events as ev
from drowse import taskload as tl

logger = logging.getLogger(__name__)


class UnknownSession(KeyError):
    pass


class SessionClosed(ValueError):
    pass


class GapInSequence(ValueError):
    """Client skipped ahead; it must resend from last_seq + 1."""

    def __init__(self, expected: int, got: int):
        self.expected = expected
        self.got = got
        super().__init__(f"expected seq {expected}, got {got}")


@dataclass
class SessionMeta:
    session_id: str
    subject_id: str
    started_at: str
    status: str  # active | closed
    last_seq: int
    line_count: int  # event lines, header excluded
    config: dict
    engine: dict
    pending: dict | None = None


@dataclass
class _SessionRuntime:
    meta: SessionMeta
    lock: threading.Lock = field(default_factory=threading.Lock)
    engine: tl.TaskSession | None = None  # lazily rebuilt from the snapshot


class SessionStore:
    """Flat-file store; per-session writers are serialized by a lock."""

    def __init__(self, root: str):
        self.root = root
        os.makedirs(root, exist_ok=True)
        self._index_lock = threading.Lock()
        self._sessions: dict[str, _SessionRuntime] = {}
        self.recovery_report: list[str] = []
        self._recover()

    # paths
    def _log_path(self, session_id: str) -> str:
        return os.path.join(self.root, session_id + ev.SESSION_FILE_SUFFIX)

    def _meta_path(self, session_id: str) -> str:
        return os.path.join(self.root, session_id + ".meta.json")

    # recovery
    def _recover(self) -> None:
        for name in sorted(os.listdir(self.root)):
            if not name.endswith(ev.SESSION_FILE_SUFFIX):
                continue
            session_id = name[: -len(ev.SESSION_FILE_SUFFIX)]
            try:
                self._recover_session(session_id)
            except Exception as exc:  # a broken session must not block the rest
                self.recovery_report.append(f"{session_id}: unrecoverable ({exc})")
                logger.warning("session %s unrecoverable: %s", session_id, exc)

    def _recover_session(self, session_id: str) -> None:
        log_path = self._log_path(session_id)
        complete_lines, torn_bytes = self._scan_log(log_path)
        if torn_bytes:
            self.recovery_report.append(
                f"{session_id}: dropped torn final line ({torn_bytes} bytes)"
            )
            logger.warning("session %s: dropped torn final line", session_id)
        actual_events = max(0, complete_lines - 1)  # header excluded

        meta_path = self._meta_path(session_id)
        if os.path.exists(meta_path):
            with open(meta_path, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
            meta = SessionMeta(
                session_id=doc["session_id"],
                subject_id=doc["subject_id"],
                started_at=doc["started_at"],
                status=doc["status"],
                last_seq=doc["last_seq"],
                line_count=doc["line_count"],
                config=doc["config"],
                engine=doc["engine"],
                pending=doc.get("pending"),
            )
        else:
            # crash between header write and the first meta write
            self.recovery_report.append(f"{session_id}: missing meta, rebuilt")
            with open(log_path, "r", encoding="utf-8") as fh:
                header = ev.decode_header(fh.readline().rstrip("\n"))
            config = tl.TaskConfig()
            meta = SessionMeta(
                session_id=session_id,
                subject_id=header["subject_id"],
                started_at=header["started_at"],
                status="active",
                last_seq=0,
                line_count=actual_events,
                config=tl.config_to_dict(config),
                engine=tl.TaskSession(config).snapshot(),
            )

        if meta.pending is not None:
            landed = meta.line_count + int(meta.pending["lines"])
            if actual_events >= landed:
                # the append hit the disk before the crash: commit it
                meta.line_count = landed
                if meta.pending["kind"] == "batch":
                    meta.last_seq = int(meta.pending["seq"])
                elif meta.pending.get("engine") is not None:
                    meta.engine = meta.pending["engine"]
            else:
                self.recovery_report.append(
                    f"{session_id}: discarded unlanded pending append"
                )
            meta.pending = None

        if actual_events != meta.line_count:
            self.recovery_report.append(
                f"{session_id}: line count {actual_events} != meta {meta.line_count}, adopted"
            )
            logger.warning(
                "session %s: line count %d != meta %d", session_id, actual_events, meta.line_count
            )
            meta.line_count = actual_events

        self._write_meta(meta)
        self._sessions[session_id] = _SessionRuntime(meta=meta)

    @staticmethod
    def _scan_log(path: str) -> tuple[int, int]:
        """Count complete lines; truncate and report a torn (newline-less) tail."""
        with open(path, "rb") as fh:
            data = fh.read()
        if not data:
            return 0, 0
        last_newline = data.rfind(b"\n")
        torn = len(data) - (last_newline + 1)
        if torn:
            with open(path, "r+b") as fh:
                fh.truncate(last_newline + 1)
        complete = data[: last_newline + 1].count(b"\n")
        return complete, torn

    # meta persistence
    def _write_meta(self, meta: SessionMeta) -> None:
        doc = {
            "session_id": meta.session_id,
            "subject_id": meta.subject_id,
            "started_at": meta.started_at,
            "status": meta.status,
            "last_seq": meta.last_seq,
            "line_count": meta.line_count,
            "config": meta.config,
            "engine": meta.engine,
            "pending": meta.pending,
        }
        path = self._meta_path(meta.session_id)
        tmp = path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(doc, fh)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)

    def _append_lines(self, session_id: str, lines: list[str]) -> None:
        buffer = "".join(line + "\n" for line in lines)
        with open(self._log_path(session_id), "a", encoding="utf-8", newline="\n") as fh:
            fh.write(buffer)
            fh.flush()
            os.fsync(fh.fileno())

    # public api
    def create(self, subject_id: str, config: tl.TaskConfig) -> SessionMeta:
        session_id = uuid.uuid4().hex
        started_at = datetime.now(timezone.utc).isoformat(timespec="seconds")
        engine = tl.TaskSession(config)
        meta = SessionMeta(
            session_id=session_id,
            subject_id=subject_id,
            started_at=started_at,
            status="active",
            last_seq=0,
            line_count=0,
            config=tl.config_to_dict(config),
            engine=engine.snapshot(),
        )
        with self._index_lock:
            header = ev.encode_header(session_id, subject_id, started_at)
            with open(self._log_path(session_id), "x", encoding="utf-8", newline="\n") as fh:
                fh.write(header + "\n")
                fh.flush()
                os.fsync(fh.fileno())
            self._write_meta(meta)
            runtime = _SessionRuntime(meta=meta, engine=engine)
            self._sessions[session_id] = runtime
        return meta

    def _runtime(self, session_id: str) -> _SessionRuntime:
        with self._index_lock:
            runtime = self._sessions.get(session_id)
        if runtime is None:
            raise UnknownSession(session_id)
        return runtime

    def meta(self, session_id: str) -> SessionMeta:
        return self._runtime(session_id).meta

    def session_ids(self) -> list[str]:
        with self._index_lock:
            return sorted(self._sessions)

    def ingest_batch(self, session_id: str, seq: int, events: list[ev.InputEvent]) -> int:
        """Append a client batch; duplicate seq is a no-op, gaps are rejected.

        Returns the highest persisted seq.
        """
        if seq < 1:
            raise ValueError(f"seq must be >= 1, got {seq}")
        runtime = self._runtime(session_id)
        with runtime.lock:
            meta = runtime.meta
            if meta.status != "active":
                raise SessionClosed(session_id)
            if seq <= meta.last_seq:
                return meta.last_seq  # retry of an acked batch
            if seq > meta.last_seq + 1:
                raise GapInSequence(meta.last_seq + 1, seq)
            lines = [ev.encode_event(e) for e in events]
            meta.pending = {"kind": "batch", "seq": seq, "lines": len(lines)}
            self._write_meta(meta)
            self._append_lines(session_id, lines)
            meta.pending = None
            meta.last_seq = seq
            meta.line_count += len(lines)
            self._write_meta(meta)
            return meta.last_seq

    def engine(self, session_id: str) -> tl.TaskSession:
        runtime = self._runtime(session_id)
        with runtime.lock:
            if runtime.engine is None:
                config = tl.config_from_dict(runtime.meta.config)
                runtime.engine = tl.TaskSession.from_snapshot(config, runtime.meta.engine)
            return runtime.engine

    def act(self, session_id: str, action: tl.Action) -> tuple[list[ev.InputEvent], tl.TaskSession]:
        """Step the engine; emitted events are persisted before returning."""
        runtime = self._runtime(session_id)
        with runtime.lock:
            meta = runtime.meta
            if meta.status != "active":
                raise SessionClosed(session_id)
            if runtime.engine is None:
                config = tl.config_from_dict(meta.config)
                runtime.engine = tl.TaskSession.from_snapshot(config, meta.engine)
            engine = runtime.engine
            emitted = engine.step(action)  # raises IllegalAction, nothing persisted
            snapshot = engine.snapshot()
            lines = [ev.encode_event(e) for e in emitted]
            meta.pending = {"kind": "act", "lines": len(lines), "engine": snapshot}
            self._write_meta(meta)
            if lines:
                self._append_lines(session_id, lines)
            meta.pending = None
            meta.line_count += len(lines)
            meta.engine = snapshot
            self._write_meta(meta)
            return emitted, engine

    def export(self, session_id: str) -> bytes:
        runtime = self._runtime(session_id)
        with runtime.lock:
            with open(self._log_path(session_id), "rb") as fh:
                return fh.read()

    def close(self, session_id: str) -> None:
        runtime = self._runtime(session_id)
        with runtime.lock:
            if runtime.meta.status != "closed":
                runtime.meta.status = "closed"
                self._write_meta(runtime.meta)
