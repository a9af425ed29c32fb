"""On-disk session state for iterative generation and editing.

One directory per session holds the outline, and per generation: the
rooms JSON, the plan PNG, and the attention-store blob. History is
append-only; the latest entry is the base for the next edit.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from ..core.codecs import (
    decode_outline_png,
    decode_plan_png,
    encode_outline_png,
    encode_plan_png,
)
from ..core.raster import OutlineMask, PlanGrid
from ..core.types import ChatplanError, RoomsDocument
from ..editing.store import AttentionStore


class UnknownSessionError(ChatplanError):
    pass


class SessionBusyError(ChatplanError):
    """A generate/edit is already in flight for this session."""


@dataclass(frozen=True)
class HistoryEntry:
    index: int
    seed: int
    tau: Optional[float]  # None for a fresh generation
    document: RoomsDocument

    def to_json_dict(self) -> dict:
        return {
            "index": self.index,
            "seed": self.seed,
            "tau": self.tau,
            "rooms": self.document.to_json_dict(),
        }


@dataclass
class Session:
    id: str
    outline: OutlineMask
    directory: Path
    created: float
    updated: float
    entries: list[HistoryEntry] = field(default_factory=list)

    def plan_path(self, index: int) -> Path:
        return self.directory / f"plan_{index:03d}.png"

    def store_path(self, index: int) -> Path:
        return self.directory / f"attn_{index:03d}.pt"

    def load_plan(self, index: int) -> PlanGrid:
        return decode_plan_png(self.plan_path(index).read_bytes())

    def load_store(self, index: int) -> AttentionStore:
        return AttentionStore.load(self.store_path(index))

    def latest(self) -> HistoryEntry:
        if not self.entries:
            raise ChatplanError("session has no generations yet")
        return self.entries[-1]


class SessionStore:
    """Directory-backed session index with per-session mutation locks."""

    def __init__(self, root: str | Path) -> None:
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._sessions: dict[str, Session] = {}
        self._index_lock = threading.Lock()
        for meta in sorted(self.root.glob("*/session.json")):
            session = self._read(meta.parent)
            self._sessions[session.id] = session
            self._locks[session.id] = threading.Lock()

    def _read(self, directory: Path) -> Session:
        meta = json.loads((directory / "session.json").read_text())
        outline = decode_outline_png((directory / "outline.png").read_bytes())
        entries = [
            HistoryEntry(
                index=e["index"],
                seed=e["seed"],
                tau=e["tau"],
                document=RoomsDocument.from_json_dict(e["rooms"]),
            )
            for e in meta["entries"]
        ]
        return Session(
            id=meta["id"],
            outline=outline,
            directory=directory,
            created=meta["created"],
            updated=meta["updated"],
            entries=entries,
        )

    def _write_meta(self, session: Session) -> None:
        payload = {
            "id": session.id,
            "created": session.created,
            "updated": session.updated,
            "entries": [e.to_json_dict() for e in session.entries],
        }
        (session.directory / "session.json").write_text(json.dumps(payload, indent=2))

    def create(self, outline: OutlineMask) -> Session:
        session_id = uuid.uuid4().hex[:12]
        directory = self.root / session_id
        directory.mkdir(parents=True)
        now = time.time()
        session = Session(
            id=session_id, outline=outline, directory=directory,
            created=now, updated=now,
        )
        (directory / "outline.png").write_bytes(encode_outline_png(outline))
        self._write_meta(session)
        with self._index_lock:
            self._sessions[session_id] = session
            self._locks[session_id] = threading.Lock()
        return session

    def get(self, session_id: str) -> Session:
        try:
            return self._sessions[session_id]
        except KeyError:
            raise UnknownSessionError(f"unknown session {session_id!r}") from None

    def delete(self, session_id: str) -> None:
        session = self.get(session_id)
        with self._index_lock:
            self._sessions.pop(session_id, None)
            self._locks.pop(session_id, None)
        for path in sorted(session.directory.iterdir()):
            path.unlink()
        session.directory.rmdir()

    def lock(self, session_id: str) -> threading.Lock:
        self.get(session_id)
        return self._locks[session_id]

    def append(
        self,
        session: Session,
        document: RoomsDocument,
        seed: int,
        tau: Optional[float],
        plan: PlanGrid,
        store: AttentionStore,
    ) -> HistoryEntry:
        entry = HistoryEntry(
            index=len(session.entries), seed=seed, tau=tau, document=document
        )
        session.plan_path(entry.index).write_bytes(encode_plan_png(plan))
        store.save(session.store_path(entry.index))
        session.entries.append(entry)
        session.updated = time.time()
        self._write_meta(session)
        return entry


def replay_session(engine, session: Session) -> list[tuple[str, str]]:
    """Re-execute the recorded (document, seed, tau) sequence.

    Returns (stored_hash, replayed_hash) per entry; both hashes are over
    the raw plan grid bytes. Deterministic engines reproduce every plan.
    """
    import hashlib

    from ..diffusion.engine import SampleRequest
    from ..editing.editor import EditRequest, edit

    results = []
    prev_store: Optional[AttentionStore] = None
    for entry in session.entries:
        stored = session.load_plan(entry.index)
        if entry.tau is None:
            stored_blob = session.load_store(entry.index)
            plan, store = engine.sample(
                SampleRequest(
                    outline=session.outline,
                    conditioning=engine.condition(entry.document),
                    seed=entry.seed,
                    guidance_scale=stored_blob.guidance_scale,
                    steps=stored_blob.steps,
                )
            )
        else:
            assert prev_store is not None, "edit entry without a base generation"
            plan, store = edit(
                engine,
                EditRequest(
                    store=prev_store, new_doc=entry.document,
                    tau=entry.tau, seed=entry.seed,
                ),
            )
        results.append(
            (
                hashlib.sha256(stored.grid.tobytes()).hexdigest(),
                hashlib.sha256(plan.grid.tobytes()).hexdigest(),
            )
        )
        prev_store = store
    return results
