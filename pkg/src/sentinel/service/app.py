"""FastAPI application over a SentinelRuntime.

All state lives in the runtime; the app is a thin, restartable veneer so
the same runtime can be driven by HTTP, WebSocket, and in-process replay
at the same time.
"""

from __future__ import annotations

import json
from contextlib import suppress
from typing import Any

import anyio
from fastapi import FastAPI, Query, Request, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse
from starlette.concurrency import run_in_threadpool

from ..errors import (
    AttributionPending,
    BadFilter,
    ContractError,
    IntegrityError,
    NotFound,
    NotReady,
    ParseError,
    SchemaMismatch,
    SentinelError,
)
from ..explain import prompt_hash
from ..runtime import SentinelRuntime
from .models import (
    EventsOut,
    ExplainIn,
    ExplainOut,
    HealthOut,
    IngestOut,
    InvalidRecordOut,
    ModelOut,
    SchemaOut,
    StatsOut,
)

_STATUS_BY_ERROR: dict[type, int] = {
    ParseError: 400,
    ContractError: 400,
    IntegrityError: 400,
    BadFilter: 400,
    SchemaMismatch: 409,
    NotReady: 409,
    AttributionPending: 409,
    NotFound: 404,
}


def _error_response(exc: SentinelError) -> JSONResponse:
    status = 500
    for etype, code in _STATUS_BY_ERROR.items():
        if isinstance(exc, etype):
            status = code
            break
    return JSONResponse(
        status_code=status, content={"error": type(exc).__name__, "detail": str(exc)}
    )


def create_app(runtime: SentinelRuntime) -> FastAPI:
    app = FastAPI(title="sentinel", version="0.1.0")
    app.state.runtime = runtime

    @app.exception_handler(SentinelError)
    async def sentinel_error_handler(request: Request, exc: SentinelError):
        return _error_response(exc)

    def check_token(request: Request) -> JSONResponse | None:
        token = runtime.config.api_token
        if not token:
            return None
        sent = request.headers.get("x-api-token") or request.headers.get(
            "authorization", ""
        ).removeprefix("Bearer ").strip()
        if sent != token:
            return JSONResponse(status_code=401, content={"error": "Unauthorized", "detail": ""})
        return None

    @app.middleware("http")
    async def token_middleware(request: Request, call_next):
        if request.url.path.startswith("/api/"):
            denied = check_token(request)
            if denied is not None:
                return denied
        return await call_next(request)

    @app.post("/api/v1/schema", response_model=SchemaOut)
    def post_schema(document: dict[str, Any]):
        schema = runtime.define_schema(document)
        return SchemaOut(
            schema_version=schema.version,
            feature_count=len(schema.features),
            class_labels=list(schema.class_labels),
        )

    @app.post("/api/v1/model", response_model=ModelOut)
    async def post_model(request: Request):
        content_type = request.headers.get("content-type", "")
        background_doc: bytes | None = None
        if content_type.startswith("multipart/form-data"):
            form = await request.form()
            if "model" not in form:
                raise ParseError("multipart upload needs a 'model' file field")
            artifact = await form["model"].read()
            if "background" in form:
                background_doc = await form["background"].read()
        else:
            artifact = await request.body()
        model = await run_in_threadpool(runtime.deploy_model, artifact)
        if background_doc is not None:
            runtime.set_background(background_doc)
        return ModelOut(
            model_id=model.model_id,
            schema_version=model.schema_version,
            n_trees=len(model.trees),
            class_labels=list(model.class_labels),
            background_vectors=len(runtime.background.vectors) if runtime.background else None,
        )

    @app.post("/api/v1/background")
    def post_background(document: dict[str, Any]):
        bg = runtime.set_background(json.dumps(document))
        return {"vectors": len(bg.vectors), "schema_version": bg.schema_version}

    @app.post("/api/v1/ingest", response_model=IngestOut, responses={422: {"model": InvalidRecordOut}})
    def post_ingest(record: dict[str, Any]):
        event, verdict = runtime.ingest(record, source_id="api")
        if event is None:
            return JSONResponse(
                status_code=422,
                content={"error": "InvalidRecord", "reasons": list(verdict.reasons)},
            )
        view = runtime.get_event(event.event_id)
        return IngestOut(
            event_id=event.event_id,
            seq=view["seq"],
            predicted_class=event.prediction.predicted_class,
            probabilities=list(event.prediction.probabilities),
            severity=event.severity,
        )

    @app.get("/api/v1/events", response_model=EventsOut)
    def get_events(
        since_seq: int = 0,
        predicted_class: str | None = Query(default=None, alias="class"),
        severity: str | None = None,
        limit: int = 100,
    ):
        events = runtime.query_events(
            since_seq=since_seq,
            predicted_class=predicted_class,
            severity=severity,
            limit=limit,
        )
        return EventsOut(events=events, last_seq=runtime.event_log.last_seq)

    @app.get("/api/v1/events/{event_id}")
    def get_event(event_id: str):
        return runtime.get_event(event_id)

    @app.post("/api/v1/events/{event_id}/explain", response_model=ExplainOut)
    async def post_explain(event_id: str, body: ExplainIn):
        prompt, result = await run_in_threadpool(
            runtime.explain_event, event_id, body.experience_level, body.descriptiveness
        )
        return ExplainOut(
            event_id=event_id,
            prompt=prompt,
            prompt_hash=prompt_hash(prompt),
            text=result.text,
            provider=result.provider,
            model_name=result.model_name,
            latency_ms=result.latency_ms,
            attempts=result.attempts,
            created_at=result.created_at,
            error=result.error,
        )

    @app.get("/api/v1/stats", response_model=StatsOut)
    def get_stats():
        return StatsOut(**runtime.stats_snapshot())

    @app.get("/api/v1/health", response_model=HealthOut)
    def get_health():
        return HealthOut(
            status="ok",
            model_id=runtime.model.model_id if runtime.model else None,
            schema_version=runtime.schema.version if runtime.schema else None,
        )

    @app.websocket("/api/v1/live")
    async def live(ws: WebSocket):
        token = runtime.config.api_token
        if token and ws.query_params.get("token") != token:
            await ws.close(code=4401)
            return
        await ws.accept()
        conn = runtime.hub.register()

        async def pump():
            while True:
                message = await run_in_threadpool(conn.get, 0.05)
                if conn.overflowed.is_set():
                    with suppress(Exception):
                        await ws.close(code=1013)  # buffer overflow: slow client
                    return
                if message is not None:
                    await ws.send_json(message)

        async def watch():
            with suppress(WebSocketDisconnect):
                while True:
                    await ws.receive()

        try:
            async with anyio.create_task_group() as tg:

                async def run_then_cancel(fn):
                    try:
                        await fn()
                    finally:
                        tg.cancel_scope.cancel()

                tg.start_soon(run_then_cancel, pump)
                tg.start_soon(run_then_cancel, watch)
        except Exception:
            pass
        finally:
            runtime.hub.unregister(conn)

    dashboard_dir = runtime.config.dashboard_dir
    if dashboard_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=dashboard_dir, html=True), name="dashboard")

    return app
