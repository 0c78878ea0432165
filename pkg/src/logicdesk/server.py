"""HTTP application: engine lifecycle, store, highlight, and static assets.

Build one with create_app(); configuration comes from ServerConfig or the
LOGICDESK_* environment variables (PORT is the deployment's concern; this
module only builds the ASGI app).
"""

from __future__ import annotations

import os
from pathlib import Path

from fastapi import Body, FastAPI, Query, Request, Response
from fastapi.responses import HTMLResponse, JSONResponse, PlainTextResponse

from . import highlight, store as store_mod
from .engine import Budget
from .reader import extract_examples
from .sessions import (
    ProtocolError,
    ServerConfig,
    SessionRegistry,
    TooManyEngines,
    UnknownSession,
)

_INDEX_FALLBACK = """<!doctype html>
<html><head><title>logicdesk</title></head>
<body>
<h1>logicdesk</h1>
<p>The API is up. Endpoints live under <code>/api/…</code>;
see the README for the protocol and the bundled web client.</p>
</body></html>
"""


def config_from_env() -> ServerConfig:
    env = os.environ
    budget = Budget(
        wall_time_limit=float(env.get("LOGICDESK_WALL_LIMIT", 60.0)),
        inference_limit=int(float(env.get("LOGICDESK_INFERENCE_LIMIT", 10**8))),
        depth_limit=int(float(env.get("LOGICDESK_DEPTH_LIMIT", 10**6))),
    )
    return ServerConfig(
        data_root=env.get("LOGICDESK_DATA_ROOT"),
        max_engines=int(env.get("LOGICDESK_MAX_ENGINES", 16)),
        sandbox=env.get("LOGICDESK_SANDBOX", "true").lower() not in ("0", "false", "no"),
        budget=budget,
        destroy_grace=float(env.get("LOGICDESK_DESTROY_GRACE", 60.0)),
        idle_ttl=float(env.get("LOGICDESK_IDLE_TTL", 900.0)),
        static_dir=env.get("LOGICDESK_STATIC_DIR"),
    )


def create_app(
    config: ServerConfig | None = None,
    registry: SessionRegistry | None = None,
    store: store_mod.Store | None = None,
) -> FastAPI:
    config = config or config_from_env()
    store = store if store is not None else store_mod.Store(config.data_root)
    registry = registry or SessionRegistry(config, store=store)
    mirrors = highlight.MirrorRegistry()

    app = FastAPI(title="logicdesk", docs_url=None, redoc_url=None)
    app.state.registry = registry
    app.state.store = store
    app.state.mirrors = mirrors
    app.state.config = config

    def _error(status: int, code: str, message: str = "", **extra) -> JSONResponse:
        return JSONResponse({"error": code, "message": message, **extra}, status_code=status)

    @app.exception_handler(UnknownSession)
    def _unknown_session(_request: Request, exc: UnknownSession):
        return _error(404, "unknown_engine", str(exc))

    @app.exception_handler(ProtocolError)
    def _protocol_error(_request: Request, exc: ProtocolError):
        return _error(409, "protocol_error", str(exc))

    @app.exception_handler(TooManyEngines)
    def _too_many(_request: Request, exc: TooManyEngines):
        return _error(429, "too_many_engines", str(exc))

    # -- engine endpoints

    @app.post("/api/pengine/create", status_code=201)
    def create_engine(payload: dict = Body(default={})):
        session = registry.create(payload.get("src", "") or "")
        return {"id": session.id}

    @app.post("/api/pengine/{session_id}/ask")
    def ask(session_id: str, payload: dict = Body(...)):
        registry.ask(
            session_id,
            payload.get("query", ""),
            chunk=payload.get("chunk"),
            debug=bool(payload.get("debug", False)),
        )
        return {"ok": True}

    @app.post("/api/pengine/{session_id}/next")
    def next_chunk(session_id: str, payload: dict = Body(default={})):
        registry.next(session_id, payload.get("count", 1))
        return {"ok": True}

    @app.post("/api/pengine/{session_id}/stop")
    def stop(session_id: str):
        registry.stop(session_id)
        return {"ok": True}

    @app.post("/api/pengine/{session_id}/abort")
    def abort(session_id: str):
        registry.abort(session_id)
        return {"ok": True}

    @app.post("/api/pengine/{session_id}/respond")
    def respond(session_id: str, payload: dict = Body(...)):
        registry.respond(session_id, str(payload.get("input", "")))
        return {"ok": True}

    @app.post("/api/pengine/{session_id}/breakpoints")
    def breakpoints(session_id: str, payload: dict = Body(...)):
        registry.set_breakpoints(session_id, payload.get("lines", []))
        return {"ok": True}

    @app.get("/api/pengine/{session_id}/events")
    def events(session_id: str, timeout: float = Query(default=0.0)):
        return {"events": registry.pull_events(session_id, timeout)}

    # -- store endpoints

    @app.post("/api/store", status_code=201)
    def store_save(payload: dict = Body(...)):
        try:
            name, blob = store.save_new(payload.get("content", ""), payload.get("author"))
        except store_mod.EmptyContent as exc:
            return _error(400, exc.code, str(exc))
        return {"name": name, "hash": blob}

    @app.put("/api/store/{name}")
    def store_update(name: str, payload: dict = Body(...)):
        try:
            blob = store.save_version(
                name, payload.get("content", ""), payload.get("previous", ""), payload.get("author")
            )
        except store_mod.Conflict as exc:
            return JSONResponse({"error": "conflict", "current": exc.current}, status_code=409)
        except store_mod.NotFound as exc:
            return _error(404, exc.code, str(exc))
        except store_mod.EmptyContent as exc:
            return _error(400, exc.code, str(exc))
        return {"hash": blob}

    @app.post("/api/store/{name}/fork", status_code=201)
    def store_fork(name: str, payload: dict = Body(default={})):
        try:
            new_name, blob = store.fork(name, payload.get("name"), payload.get("author"))
        except store_mod.NotFound as exc:
            return _error(404, exc.code, str(exc))
        except (store_mod.NameTaken, store_mod.BadName) as exc:
            return _error(409, exc.code, str(exc))
        return {"name": new_name, "hash": blob}

    @app.get("/api/store/{name}/history")
    def store_history(name: str):
        try:
            commits = store.history(name)
        except store_mod.NotFound as exc:
            return _error(404, exc.code, str(exc))
        return {"history": [c.to_json() for c in commits]}

    @app.get("/api/store/{ref}")
    def store_load(ref: str, version: str | None = None, format: str | None = None):
        try:
            content, commit = store.load(ref, version)
        except store_mod.VersionNotInHistory as exc:
            return _error(404, exc.code, str(exc))
        except store_mod.NotFound as exc:
            return _error(404, exc.code, str(exc))
        if format == "json":
            return {
                "content": content,
                "commit": commit.to_json(),
                "examples": extract_examples(content),
            }
        return PlainTextResponse(content)

    # -- highlight endpoints

    @app.post("/api/highlight/{uuid}")
    def highlight_update(uuid: str, payload: dict = Body(...)):
        try:
            highlight.update_mirror(mirrors, uuid, payload)
            generation, groups = highlight.enriched_tokens(mirrors, uuid)
        except highlight.HighlightError as exc:
            status = 409 if exc.code == "stale_generation" else 404
            return _error(status, exc.code, str(exc))
        return {
            "generation": generation,
            "groups": [[tok.to_json() for tok in group] for group in groups],
        }

    @app.get("/api/hover/{uuid}")
    def hover(uuid: str, offset: int = Query(...)):
        try:
            info = highlight.hover_info(mirrors, uuid, offset)
        except highlight.HighlightError as exc:
            return _error(404, exc.code, str(exc))
        return info or {}

    @app.get("/api/templates")
    def templates(prefix: str = Query(default="")):
        return {"templates": highlight.templates(prefix)}

    # -- web client

    static_dir = Path(config.static_dir) if config.static_dir else None

    @app.get("/", response_class=HTMLResponse)
    def index():
        if static_dir is not None:
            index_file = static_dir / "index.html"
            if index_file.is_file():
                return HTMLResponse(index_file.read_text("utf-8"))
        return HTMLResponse(_INDEX_FALLBACK)

    @app.get("/static/{path:path}")
    def static_asset(path: str):
        if static_dir is None:
            return Response(status_code=404)
        target = (static_dir / path).resolve()
        if not str(target).startswith(str(static_dir.resolve())) or not target.is_file():
            return Response(status_code=404)
        media = "text/javascript" if target.suffix == ".js" else (
            "text/css" if target.suffix == ".css" else "application/octet-stream"
        )
        return Response(target.read_bytes(), media_type=media)

    return app
