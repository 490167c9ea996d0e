"""HTTP facade over the run store: create runs, fire actions as jobs, export.

Mutations map 1:1 to pipeline actions and run asynchronously; a second
mutation on a busy run is rejected with 409. GET endpoints never mutate.
"""

from __future__ import annotations

import threading
import uuid

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse, Response

from .app import (
    ACTIONS,
    EXPORT_KINDS,
    JobInfo,
    RunStore,
    _now,
    advance,
    check_transition,
    create_run,
    export_report,
)
from .config import PipelineConfig
from .corpus import Narrative
from .errors import (
    IllegalTransition,
    InvalidParams,
    MalformedInput,
    NotReady,
    UnknownRun,
)
from .provider import Provider


def create_app(store: RunStore, provider: Provider, default_config: PipelineConfig | None = None) -> FastAPI:
    app = FastAPI(title="narrafact")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    in_flight: set[str] = set()
    in_flight_lock = threading.Lock()

    def error(status: int, message: str) -> JSONResponse:
        return JSONResponse(status_code=status, content={"error": message})

    @app.exception_handler(UnknownRun)
    async def _unknown_run(_req: Request, exc: UnknownRun):
        return error(404, f"unknown run: {exc}")

    @app.exception_handler(IllegalTransition)
    async def _illegal(_req: Request, exc: IllegalTransition):
        return error(400, str(exc))

    @app.exception_handler(NotReady)
    async def _not_ready(_req: Request, exc: NotReady):
        return error(409, str(exc))

    @app.exception_handler(InvalidParams)
    async def _invalid(_req: Request, exc: InvalidParams):
        return error(400, str(exc))

    @app.exception_handler(MalformedInput)
    async def _malformed(_req: Request, exc: MalformedInput):
        return error(400, str(exc))

    @app.post("/runs", status_code=201)
    async def post_run(body: dict):
        narrative = Narrative.from_dict(body.get("narrative") or {})
        config_payload = body.get("config") or {}
        base = (default_config or PipelineConfig()).to_dict()
        base.update(config_payload)
        record = create_run(store, narrative, PipelineConfig.from_dict(base))
        return {"run": record.to_view()}

    @app.get("/runs")
    async def list_runs():
        views = []
        for run_id in store.list_runs():
            record = store.load(run_id)
            views.append(
                {
                    "run_id": record.run_id,
                    "stage": record.stage,
                    "title": record.narrative.title,
                    "updated_at": record.updated_at,
                }
            )
        return {"runs": views}

    @app.get("/runs/{run_id}")
    async def get_run(run_id: str):
        return {"run": store.load(run_id).to_view()}

    def _run_job(run_id: str, job_id: str, action: str) -> None:
        try:
            advance(store, provider, run_id, action)
            status, err = "done", None
        except Exception as exc:  # failure lands on the job, prior state intact
            status, err = "failed", str(exc)
        try:
            with store.lock_for(run_id):
                record = store.load(run_id)
                job = record.jobs.get(job_id)
                if job:
                    job.status = status
                    job.error = err
                    job.finished_at = _now()
                store.save(record)
        finally:
            with in_flight_lock:
                in_flight.discard(run_id)

    @app.post("/runs/{run_id}/actions", status_code=202)
    async def post_action(run_id: str, body: dict):
        action = body.get("action")
        if action not in ACTIONS:
            return error(400, f"unknown action: {action!r}")
        with in_flight_lock:
            if run_id in in_flight:
                return error(409, f"run {run_id} has a mutation in flight")
            in_flight.add(run_id)
        try:
            with store.lock_for(run_id):
                record = store.load(run_id)
                check_transition(record.stage, action)
                job = JobInfo(
                    job_id=uuid.uuid4().hex[:8],
                    action=action,
                    status="pending",
                    created_at=_now(),
                )
                record.jobs[job.job_id] = job
                store.save(record)
        except Exception:
            with in_flight_lock:
                in_flight.discard(run_id)
            raise
        worker = threading.Thread(target=_run_job, args=(run_id, job.job_id, action), daemon=True)
        worker.start()
        return {"job_id": job.job_id, "run_id": run_id, "action": action}

    @app.get("/runs/{run_id}/jobs/{job_id}")
    async def get_job(run_id: str, job_id: str):
        record = store.load(run_id)
        job = record.jobs.get(job_id)
        if job is None:
            return error(404, f"unknown job: {job_id}")
        return {"job": job.to_dict()}

    @app.get("/runs/{run_id}/export")
    async def get_export(run_id: str, kind: str):
        if kind not in EXPORT_KINDS:
            return error(400, f"unknown export kind: {kind!r}")
        path = export_report(store, run_id, kind)
        data = path.read_bytes()
        if kind == "text_summary":
            return PlainTextResponse(content=data.decode("utf-8"))
        return Response(content=data, media_type="application/json")

    return app
