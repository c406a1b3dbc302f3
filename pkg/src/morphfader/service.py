"""HTTP service wrapping session recording and morph rendering.

Session creation is asynchronous: POST returns 202 with an id immediately and
a background worker records the capture pair; clients poll GET until the state
is ready. Morph rendering is synchronous and cached by (session, config), so
identical requests return the same morph_id and byte-identical WAVs.
"""

from __future__ import annotations

import hashlib
import json
import queue
import threading
import uuid
from contextlib import asynccontextmanager
from dataclasses import dataclass, field
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel, Field

from .audio import to_wav_bytes
from .backend import DiffusionBackend, ToyBackend
from .baselines import prompt_morph, waveform_mix
from .capture import CaptureSession, record_session_pair
from .errors import MorphFaderError, RangeError
from .evaluation import METHODS, alpha_grid
from .morph import ComponentMask, MorphConfig, run_morph

DEFAULT_SEED = 0
DEFAULT_STEPS = 20


class SessionRequest(BaseModel):
    source_prompt: str
    target_prompt: str
    seed: int = DEFAULT_SEED
    steps: int = Field(default=DEFAULT_STEPS, ge=1)


class MorphRequest(BaseModel):
    alpha: float
    components: str = "qkv"
    source_weights: Optional[list[float]] = None
    target_weights: Optional[list[float]] = None


class SweepRequest(BaseModel):
    alpha_step: float = 0.1
    method: str = "ours"


@dataclass
class SessionEntry:
    session_id: str
    request: SessionRequest
    state: str = "pending"  # pending -> ready | failed
    error: Optional[str] = None
    source: Optional[CaptureSession] = None
    target: Optional[CaptureSession] = None
    lock: threading.Lock = field(default_factory=threading.Lock)

    def to_record(self) -> dict:
        return {
            "session_id": self.session_id,
            "source_prompt": self.request.source_prompt,
            "target_prompt": self.request.target_prompt,
            "seed": self.request.seed,
            "steps": self.request.steps,
            "state": self.state,
            "source_tokens": list(self.source.token_strings) if self.source else None,
            "target_tokens": list(self.target.token_strings) if self.target else None,
            "error": self.error,
        }


def _error_response(status: int, message: str, field_name: Optional[str] = None) -> JSONResponse:
    payload: dict = {"error": message}
    if field_name is not None:
        payload["field"] = field_name
    return JSONResponse(status_code=status, content=payload)


def _morph_id(session_id: str, config: dict) -> str:
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(f"{session_id}|{canonical}".encode()).hexdigest()[:16]


def create_app(
    backend: Optional[DiffusionBackend] = None,
    workers: int = 1,
    static_dir: Optional[str] = None,
) -> FastAPI:
    """Build the service app; state is per-app, so tests stay isolated."""
    backend = backend if backend is not None else ToyBackend()
    sessions: dict[str, SessionEntry] = {}
    morph_wavs: dict[str, bytes] = {}
    store_lock = threading.Lock()
    jobs: "queue.Queue[Optional[SessionEntry]]" = queue.Queue()
    worker_count = max(1, int(workers))

    def worker() -> None:
        while True:
            entry = jobs.get()
            if entry is None:
                return
            try:
                src, tgt = record_session_pair(
                    backend,
                    entry.request.source_prompt,
                    entry.request.target_prompt,
                    entry.request.seed,
                    entry.request.steps,
                )
            except Exception as exc:  # surface any failure to the client
                entry.error = str(exc)
                entry.state = "failed"
            else:
                entry.source = src
                entry.target = tgt
                entry.state = "ready"

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        threads = [
            threading.Thread(target=worker, daemon=True, name=f"morphfader-worker-{i}")
            for i in range(worker_count)
        ]
        for t in threads:
            t.start()
        try:
            yield
        finally:
            for _ in threads:
                jobs.put(None)
            for t in threads:
                t.join(timeout=5)

    app = FastAPI(title="morphfader", lifespan=lifespan)

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(request: Request, exc: RequestValidationError):
        errors = exc.errors()
        first = errors[0] if errors else {}
        loc = [str(part) for part in first.get("loc", []) if part != "body"]
        return _error_response(
            400, first.get("msg", "invalid request body"), ".".join(loc) or None
        )

    @app.exception_handler(MorphFaderError)
    async def on_domain_error(request: Request, exc: MorphFaderError):
        return _error_response(400, str(exc))

    def get_entry(session_id: str) -> Optional[SessionEntry]:
        with store_lock:
            return sessions.get(session_id)

    def render_morph(entry: SessionEntry, config: MorphRequest) -> str:
        key = {
            "kind": "morph",
            "alpha": config.alpha,
            "components": config.components,
            "source_weights": config.source_weights,
            "target_weights": config.target_weights,
        }
        morph_id = _morph_id(entry.session_id, key)
        with store_lock:
            if morph_id in morph_wavs:
                return morph_id
        morph_config = MorphConfig(
            alpha=config.alpha,
            mask=ComponentMask.from_string(config.components),
            source_weights=config.source_weights,
            target_weights=config.target_weights,
        )
        with entry.lock:
            clip = run_morph(entry.source, entry.target, morph_config, backend)
        wav = to_wav_bytes(clip)
        with store_lock:
            morph_wavs.setdefault(morph_id, wav)
        return morph_id

    def render_baseline(entry: SessionEntry, method: str, alpha: float) -> str:
        key = {"kind": method, "alpha": alpha}
        morph_id = _morph_id(entry.session_id, key)
        with store_lock:
            if morph_id in morph_wavs:
                return morph_id
        if method == "mix":
            clip = waveform_mix(entry.source.audio, entry.target.audio, alpha)
        else:
            clip = prompt_morph(
                entry.request.source_prompt,
                entry.request.target_prompt,
                alpha,
                entry.request.seed,
                entry.request.steps,
                backend,
            )
        wav = to_wav_bytes(clip)
        with store_lock:
            morph_wavs.setdefault(morph_id, wav)
        return morph_id

    @app.post("/api/sessions", status_code=202)
    def create_session(request: SessionRequest):
        if not request.source_prompt.strip() or not request.target_prompt.strip():
            return _error_response(
                400,
                "source_prompt and target_prompt must be non-empty",
                "source_prompt" if not request.source_prompt.strip() else "target_prompt",
            )
        entry = SessionEntry(session_id=uuid.uuid4().hex[:12], request=request)
        with store_lock:
            sessions[entry.session_id] = entry
        jobs.put(entry)
        return {"session_id": entry.session_id}

    @app.get("/api/sessions/{session_id}")
    def get_session(session_id: str):
        entry = get_entry(session_id)
        if entry is None:
            return _error_response(404, f"unknown session {session_id}")
        return entry.to_record()

    @app.post("/api/sessions/{session_id}/morphs")
    def create_morph(session_id: str, request: MorphRequest):
        entry = get_entry(session_id)
        if entry is None:
            return _error_response(404, f"unknown session {session_id}")
        if entry.state != "ready":
            return _error_response(
                409, f"session {session_id} is {entry.state}, not ready"
            )
        if not 0.0 <= request.alpha <= 1.0:
            return _error_response(
                400, f"alpha must be in [0, 1], got {request.alpha}", "alpha"
            )
        if request.components not in ComponentMask.COMPONENT_SETS:
            return _error_response(
                400,
                f"components must be one of {', '.join(ComponentMask.COMPONENT_SETS)}",
                "components",
            )
        for name, weights, session in (
            ("source_weights", request.source_weights, entry.source),
            ("target_weights", request.target_weights, entry.target),
        ):
            if weights is not None and len(weights) != session.token_count:
                return _error_response(
                    400,
                    f"{name} has {len(weights)} entries for "
                    f"{session.token_count} tokens",
                    name,
                )
        return {"morph_id": render_morph(entry, request)}

    @app.post("/api/sessions/{session_id}/sweep")
    def create_sweep(session_id: str, request: SweepRequest):
        entry = get_entry(session_id)
        if entry is None:
            return _error_response(404, f"unknown session {session_id}")
        if entry.state != "ready":
            return _error_response(
                409, f"session {session_id} is {entry.state}, not ready"
            )
        if request.method not in METHODS:
            return _error_response(
                400, f"method must be one of {', '.join(METHODS)}", "method"
            )
        try:
            grid = alpha_grid(request.alpha_step)
        except MorphFaderError as exc:
            return _error_response(400, str(exc), "alpha_step")
        if request.method == "ours":
            ids = [
                render_morph(entry, MorphRequest(alpha=alpha)) for alpha in grid
            ]
        else:
            ids = [render_baseline(entry, request.method, alpha) for alpha in grid]
        return {"morph_ids": ids}

    @app.get("/api/morphs/{morph_id}/audio")
    def get_morph_audio(morph_id: str):
        with store_lock:
            wav = morph_wavs.get(morph_id)
        if wav is None:
            return _error_response(404, f"unknown morph {morph_id}")
        return Response(content=wav, media_type="audio/wav")

    @app.get("/api/sessions/{session_id}/audio/{which}")
    def get_session_audio(session_id: str, which: str):
        entry = get_entry(session_id)
        if entry is None:
            return _error_response(404, f"unknown session {session_id}")
        if which not in ("source", "target"):
            return _error_response(404, "audio endpoint is /audio/source or /audio/target")
        if entry.state != "ready":
            return _error_response(
                409, f"session {session_id} is {entry.state}, not ready"
            )
        session = entry.source if which == "source" else entry.target
        return Response(content=to_wav_bytes(session.audio), media_type="audio/wav")

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
