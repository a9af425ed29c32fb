"""HTTP session service for the interactive UI.

Request/response bodies are JSON; plans travel as base64 PNG plus the raw
grid. Distinct sessions are fully concurrent; each session serializes its
own mutations (409 on overlap).
"""

from __future__ import annotations

import base64
import binascii
import secrets
from dataclasses import dataclass
from typing import Any, Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from ..core.codecs import encode_plan_png, load_outline
from ..core.raster import PlanGrid
from ..core.types import ChatplanError, RoomsDocument, ValidationError
from ..diffusion.engine import DiffusionEngine, SampleRequest
from ..editing.editor import EditRequest, edit
from ..prompting import (
    LlmConfig,
    HttpTransport,
    LlmTransportError,
    Transport,
    extract,
)
from ..prompting.validate import ExtractionResult, validate_document
from .sessions import (
    Session,
    SessionBusyError,
    SessionStore,
    UnknownSessionError,
)


@dataclass(frozen=True)
class ServiceConfig:
    sample_steps: int = 50
    guidance_scale: float = 2.0


class ParseBody(BaseModel):
    text: str
    previous: Optional[dict] = None


class CreateSessionBody(BaseModel):
    outline: Any  # polygon vertex list or base64 PNG string


class GenerateBody(BaseModel):
    rooms: Optional[dict] = None
    text: Optional[str] = None
    seed: Optional[int] = None
    guidance: Optional[float] = None


class EditBody(BaseModel):
    rooms: Optional[dict] = None
    text: Optional[str] = None
    tau: float


def _error_body(kind: str, message: str) -> dict:
    return {"error": {"kind": kind, "message": message}}


def create_app(
    engine: DiffusionEngine,
    session_root: str,
    transport: Optional[Transport] = None,
    llm_cfg: Optional[LlmConfig] = None,
    config: ServiceConfig = ServiceConfig(),
) -> FastAPI:
    app = FastAPI(title="chatplan service")
    sessions = SessionStore(session_root)
    cfg = llm_cfg or LlmConfig.from_env()
    llm_transport = transport or HttpTransport()

    @app.exception_handler(ValidationError)
    async def on_validation(_req: Request, exc: ValidationError):
        return JSONResponse(status_code=400, content=_error_body("validation", str(exc)))

    @app.exception_handler(UnknownSessionError)
    async def on_unknown(_req: Request, exc: UnknownSessionError):
        return JSONResponse(status_code=404, content=_error_body("unknown_session", str(exc)))

    @app.exception_handler(SessionBusyError)
    async def on_busy(_req: Request, exc: SessionBusyError):
        return JSONResponse(status_code=409, content=_error_body("session_busy", str(exc)))

    @app.exception_handler(LlmTransportError)
    async def on_transport(_req: Request, exc: LlmTransportError):
        return JSONResponse(status_code=502, content=_error_body("llm_transport", str(exc)))

    @app.exception_handler(ChatplanError)
    async def on_chatplan(_req: Request, exc: ChatplanError):
        return JSONResponse(status_code=400, content=_error_body("request", str(exc)))

    def resolve_document(
        rooms: Optional[dict], text: Optional[str],
        previous: Optional[RoomsDocument],
    ) -> tuple[RoomsDocument, Optional[ExtractionResult]]:
        if (rooms is None) == (text is None):
            raise ValidationError("provide exactly one of 'rooms' or 'text'")
        if rooms is not None:
            if "rooms" not in rooms:
                raise ValidationError('rooms payload must carry a "rooms" key')
            return validate_document(rooms["rooms"]).document, None
        result = extract(text, cfg, llm_transport, previous_document=previous)
        return result.document, result

    def plan_response(plan: PlanGrid, seed: int) -> dict:
        return {
            "plan_png": base64.b64encode(encode_plan_png(plan)).decode(),
            "grid": plan.grid.tolist(),
            "seed": seed,
        }

    def parse_outline(raw: Any):
        if isinstance(raw, str):
            try:
                return load_outline(base64.b64decode(raw, validate=True))
            except (binascii.Error, ValueError):
                raise ValidationError("outline string must be base64 PNG") from None
        return load_outline(raw)

    @app.post("/v1/parse")
    def parse_endpoint(body: ParseBody):
        previous = (
            RoomsDocument.from_json_dict(body.previous) if body.previous else None
        )
        result = extract(body.text, cfg, llm_transport, previous_document=previous)
        return {
            "rooms": result.document.to_json_dict()["rooms"],
            "corrections": [c._asdict() for c in result.corrections],
            "rejected": [r._asdict() for r in result.rejected],
        }

    @app.post("/v1/sessions", status_code=201)
    def create_session(body: CreateSessionBody):
        session = sessions.create(parse_outline(body.outline))
        return {"id": session.id}

    @app.get("/v1/sessions/{session_id}")
    def get_session(session_id: str):
        session = sessions.get(session_id)
        return {
            "id": session.id,
            "created": session.created,
            "updated": session.updated,
            "entries": [e.to_json_dict() for e in session.entries],
        }

    @app.delete("/v1/sessions/{session_id}", status_code=204)
    def delete_session(session_id: str):
        sessions.delete(session_id)

    def _acquire(session: Session):
        lock = sessions.lock(session.id)
        if not lock.acquire(blocking=False):
            raise SessionBusyError(
                f"session {session.id} already has a request in flight"
            )
        return lock

    @app.post("/v1/sessions/{session_id}/generate")
    def generate(session_id: str, body: GenerateBody):
        session = sessions.get(session_id)
        lock = _acquire(session)
        try:
            previous = session.entries[-1].document if session.entries else None
            document, _ = resolve_document(body.rooms, body.text, previous)
            seed = body.seed if body.seed is not None else secrets.randbits(31)
            request = SampleRequest(
                outline=session.outline,
                conditioning=engine.condition(document),
                seed=seed,
                guidance_scale=(
                    body.guidance if body.guidance is not None
                    else config.guidance_scale
                ),
                steps=config.sample_steps,
            )
            plan, store = engine.sample(request)
            sessions.append(session, document, seed, None, plan, store)
            return plan_response(plan, seed)
        finally:
            lock.release()

    @app.post("/v1/sessions/{session_id}/edit")
    def edit_endpoint(session_id: str, body: EditBody):
        session = sessions.get(session_id)
        lock = _acquire(session)
        try:
            base = session.latest()
            store = session.load_store(base.index)
            document, _ = resolve_document(body.rooms, body.text, base.document)
            plan, new_store = edit(
                engine,
                EditRequest(
                    store=store, new_doc=document, tau=body.tau, seed=base.seed
                ),
            )
            sessions.append(session, document, base.seed, body.tau, plan, new_store)
            return plan_response(plan, base.seed)
        finally:
            lock.release()

    app.state.sessions = sessions
    app.state.engine = engine
    return app
