"""HTTP/JSON session layer: load a study once, then query subsets at will.

Sessions live in memory with TTL eviction; answers are pure functions of the
stored study, so any sequence of queries matches issuing each in isolation.
Context computation per (session, alpha) is single-flight: one thread computes,
simultaneous requesters wait and reuse the cached result.
"""

from __future__ import annotations

import secrets
import threading
import time
from dataclasses import dataclass, field as dc_field

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import __version__, core
from .study import PValueStudy, SubsetSelection, decimal_str
from .tables import ParseError, study_from_json, study_from_text

__all__ = ["create_app", "DEFAULT_TTL_SECONDS", "DEFAULT_MAX_STUDY_SIZE"]

DEFAULT_TTL_SECONDS = 3600.0
DEFAULT_MAX_STUDY_SIZE = 10_000_000
PRELOADED_SID = "preloaded"


@dataclass
class Session:
    study: PValueStudy
    expires_at: float
    contexts: dict[float, core.HommelContext] = dc_field(default_factory=dict)
    context_computations: int = 0
    _alpha_locks: dict[float, threading.Lock] = dc_field(default_factory=dict)
    _meta: threading.Lock = dc_field(default_factory=threading.Lock)

    def context(self, alpha: float) -> core.HommelContext:
        with self._meta:
            cached = self.contexts.get(alpha)
            if cached is not None:
                return cached
            lock = self._alpha_locks.setdefault(alpha, threading.Lock())
        with lock:
            cached = self.contexts.get(alpha)
            if cached is None:
                cached = core.hommel_context(self.study, alpha)
                with self._meta:
                    self.contexts[alpha] = cached
                    self.context_computations += 1
        return cached


class SessionStore:
    def __init__(self, ttl: float, clock):
        self._ttl = ttl
        self._clock = clock
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def _sweep_locked(self) -> None:
        now = self._clock()
        dead = [sid for sid, s in self._sessions.items() if s.expires_at <= now]
        for sid in dead:
            del self._sessions[sid]

    def add(self, study: PValueStudy, sid: str | None = None) -> str:
        with self._lock:
            self._sweep_locked()
            if sid is None:
                sid = secrets.token_hex(8)
            self._sessions[sid] = Session(study, self._clock() + self._ttl)
            return sid

    def get(self, sid: str) -> Session:
        with self._lock:
            self._sweep_locked()
            session = self._sessions.get(sid)
            if session is None:
                raise HTTPException(status_code=404, detail="unknown session")
            session.expires_at = self._clock() + self._ttl
            return session


class BoundRequest(BaseModel):
    alpha: float
    ids: list[str] | None = None
    indices: list[int] | None = None
    top: int | None = None
    p_max: float | None = None


class MinAlphaRequest(BaseModel):
    k: int
    tol: float = 1e-4
    ids: list[str] | None = None
    indices: list[int] | None = None
    top: int | None = None
    p_max: float | None = None


def _resolve(study: PValueStudy, body) -> SubsetSelection:
    given = [name for name in ("ids", "indices", "top", "p_max")
             if getattr(body, name) is not None]
    if len(given) != 1:
        raise HTTPException(
            status_code=422,
            detail="provide exactly one of ids, indices, top, p_max")
    try:
        if body.ids is not None:
            return study.select_ids(body.ids)
        if body.indices is not None:
            return study.select_indices(body.indices)
        if body.top is not None:
            return study.top(body.top)
        return study.p_at_most(body.p_max)
    except (KeyError, ValueError) as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from None


def _check_alpha(alpha: float) -> float:
    if not 0.0 <= alpha <= 1.0:
        raise HTTPException(status_code=422, detail="alpha must lie in [0, 1]")
    return float(alpha)


def create_app(preloaded: PValueStudy | None = None, *,
               ttl_seconds: float = DEFAULT_TTL_SECONDS,
               max_study_size: int = DEFAULT_MAX_STUDY_SIZE,
               clock=time.monotonic,
               ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="fdplens service", version=__version__)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    store = SessionStore(ttl_seconds, clock)
    app.state.store = store
    if preloaded is not None:
        store.add(preloaded, sid=PRELOADED_SID)

    @app.exception_handler(RequestValidationError)
    async def malformed_body(_request, exc):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    @app.post("/studies")
    async def upload_study(request: Request):
        content_type = request.headers.get("content-type", "")
        raw = await request.body()
        try:
            if content_type.startswith("application/json"):
                import json as _json

                try:
                    payload = _json.loads(raw)
                except ValueError as exc:
                    raise ParseError(f"invalid JSON: {exc}") from None
                study = study_from_json(payload)
            else:
                study = study_from_text(raw.decode("utf-8", errors="strict"))
        except (ParseError, UnicodeDecodeError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        if study.m > max_study_size:
            raise HTTPException(status_code=413,
                                detail=f"study exceeds m <= {max_study_size}")
        sid = store.add(study)
        return {"session_id": sid, "m": study.m}

    @app.get("/study")
    def preloaded_study():
        session = store.get(PRELOADED_SID)
        study = session.study
        return {"session_id": PRELOADED_SID, "m": study.m,
                "ids": list(study.ids), "p": study.p.tolist()}

    @app.get("/studies/{sid}/summary")
    def summary(sid: str, alpha: float):
        session = store.get(sid)
        ctx = session.context(_check_alpha(alpha))
        study = session.study
        zset = core.concentration_set(ctx)
        return {
            "m": study.m,
            "alpha": ctx.alpha,
            "h": ctx.h,
            "z": ctx.z,
            "pi_hat": decimal_str(ctx.pi_hat),
            "r_size": core.hommel_rejections(study, ctx).size,
            "b": core.bh_set(study, ctx.alpha).size,
            "concentration_ids": [study.id_of(i) for i in zset.index_list],
        }

    @app.post("/studies/{sid}/bound")
    def bound(sid: str, body: BoundRequest):
        session = store.get(sid)
        ctx = session.context(_check_alpha(body.alpha))
        selection = _resolve(session.study, body)
        report = core.discoveries(session.study, selection, ctx)
        return report.to_dict()

    @app.post("/studies/{sid}/min-alpha")
    def min_alpha(sid: str, body: MinAlphaRequest):
        session = store.get(sid)
        selection = _resolve(session.study, body)
        try:
            value = core.min_alpha_for(session.study, selection, body.k, body.tol)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        return {"alpha": value, "attainable": value is not None}

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
