"""HTTP + WebSocket API: project management, sample upload, training jobs,
model download/eval, and live streaming classification."""

from __future__ import annotations

import logging
import time
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request, WebSocket, WebSocketDisconnect
from fastapi.concurrency import run_in_threadpool
from fastapi.responses import FileResponse, JSONResponse
from pydantic import BaseModel, Field

from .. import __version__, kernels
from ..embedder import EmbeddingModel
from ..errors import (
    GestureForgeError,
    InvalidArgument,
    LabelMismatch,
    ParseError,
)
from ..gesture import Regime, TrainSpec, predict
from ..landmarks import frame_from_record
from ..metrics import evaluate
from .bench import LatencyStats
from .jobs import JobRunner
from .store import Conflict, ModelRegistry, NotFound, ProjectStore

log = logging.getLogger(__name__)

WS_MODEL_NOT_FOUND = 4404
WS_UNAUTHORIZED = 4401


class CreateProject(BaseModel):
    name: str
    classes: list[str] = Field(default_factory=list)


class AddClass(BaseModel):
    name: str


class UploadSamples(BaseModel):
    class_name: str
    samples: list[dict]
    key: str | None = None


class StartJob(BaseModel):
    regime: str
    k: int
    seed: int = 0
    epochs: int = 50
    lr_head: float = 1e-3
    lr_embedder: float = 1e-4
    batch_size: int = 32


class EvalRequest(BaseModel):
    samples: list[dict]  # objects with "label" and "frame"


def _error(status: int, code: str, message: str) -> HTTPException:
    return HTTPException(status_code=status, detail={"code": code, "message": message})


def _parse_regime(value: str) -> Regime:
    try:
        return Regime(value)
    except ValueError:
        raise _error(400, "invalid_regime",
                     f"regime must be one of {[r.value for r in Regime]}, got {value!r}")


def _parse_frame(record: dict, where: str):
    try:
        return frame_from_record(record)
    except (ParseError, InvalidArgument) as exc:
        raise _error(400, "invalid_frame", f"{where}: {exc}")


def create_app(data_dir: Path, embedder: EmbeddingModel | None = None,
               embedder_source: str = "default-untrained(seed=0)",
               token: str | None = None, workers: int = 1) -> FastAPI:
    from ..workflow import default_embedder

    store = ProjectStore(data_dir)
    registry = ModelRegistry(data_dir)
    if embedder is None:
        embedder = default_embedder()
    runner = JobRunner(store, registry, embedder, workers=workers)

    app = FastAPI(title="gestureforge", version=__version__)
    app.state.store = store
    app.state.registry = registry
    app.state.runner = runner
    app.state.stream_latencies: list[float] = []

    @app.exception_handler(GestureForgeError)
    async def domain_error(request: Request, exc: GestureForgeError):
        if isinstance(exc, NotFound):
            status = 404
        elif isinstance(exc, Conflict):
            status = 409
        else:
            status = 400
        return JSONResponse(status_code=status,
                            content={"detail": {"code": type(exc).__name__,
                                                "message": str(exc)}})

    def check_token(request: Request):
        if token is None:
            return
        header = request.headers.get("authorization", "")
        if header != f"Bearer {token}":
            raise _error(401, "unauthorized", "missing or invalid bearer token")

    @app.middleware("http")
    async def auth_middleware(request: Request, call_next):
        if token is not None and request.url.path.startswith("/api/"):
            header = request.headers.get("authorization", "")
            if header != f"Bearer {token}":
                return JSONResponse(status_code=401,
                                    content={"detail": {"code": "unauthorized",
                                                        "message": "missing or invalid bearer token"}})
        return await call_next(request)

    @app.get("/api/v1/status")
    def status():
        lat = app.state.stream_latencies[-2000:]
        return {
            "version": __version__,
            "kernel_implementation": kernels.IMPLEMENTATION,
            "embedder_source": embedder_source,
            "projects": len(store.list()),
            "models": len(list(registry.root.glob("*.gfrg"))),
            "stream_latency": LatencyStats.from_samples_ms(lat).to_dict(),
        }

    # -- projects ----------------------------------------------------------

    @app.post("/api/v1/projects", status_code=201)
    def create_project(body: CreateProject):
        return store.create(body.name, body.classes).to_dict()

    @app.get("/api/v1/projects")
    def list_projects():
        return [p.to_dict() for p in store.list()]

    @app.get("/api/v1/projects/{project_id}")
    def get_project(project_id: str):
        return store.get(project_id).to_dict()

    @app.post("/api/v1/projects/{project_id}/classes")
    def add_class(project_id: str, body: AddClass):
        return store.add_class(project_id, body.name).to_dict()

    @app.post("/api/v1/projects/{project_id}/samples")
    def upload_samples(project_id: str, body: UploadSamples):
        frames = [_parse_frame(rec, f"sample {i}") for i, rec in enumerate(body.samples)]
        project, added, deduplicated = store.add_samples(
            project_id, body.class_name, frames, key=body.key)
        return {"added": added, "deduplicated": deduplicated,
                "sample_counts": project.sample_counts}

    # -- jobs ----------------------------------------------------------------

    @app.post("/api/v1/projects/{project_id}/jobs", status_code=202)
    def start_job(project_id: str, body: StartJob):
        regime = _parse_regime(body.regime)
        try:
            spec = TrainSpec(regime=regime, k=body.k, seed=body.seed,
                             epochs=body.epochs, lr_head=body.lr_head,
                             lr_embedder=body.lr_embedder, batch_size=body.batch_size)
        except InvalidArgument as exc:
            raise _error(400, "InvalidArgument", str(exc))
        return runner.submit(project_id, spec).to_dict()

    @app.get("/api/v1/jobs/{job_id}")
    def get_job(job_id: str):
        return runner.get(job_id).to_dict()

    @app.get("/api/v1/jobs")
    def list_jobs(project_id: str | None = None):
        return [j.to_dict() for j in runner.list(project_id)]

    # -- models --------------------------------------------------------------

    @app.get("/api/v1/models")
    def list_models():
        return registry.list()

    @app.get("/api/v1/models/{model_id}")
    def model_info(model_id: str):
        return registry.info(model_id)

    @app.get("/api/v1/models/{model_id}/file")
    def model_file(model_id: str):
        return FileResponse(registry.path(model_id), media_type="application/octet-stream",
                            filename=f"{model_id}.gfrg")

    @app.post("/api/v1/models/{model_id}/eval")
    def eval_model(model_id: str, body: EvalRequest):
        model = registry.load(model_id)
        split = []
        for i, rec in enumerate(body.samples):
            if "label" not in rec or "frame" not in rec:
                raise _error(400, "invalid_sample",
                             f"sample {i}: expected fields 'label' and 'frame'")
            split.append((_parse_frame(rec["frame"], f"sample {i}"), rec["label"]))
        if not split:
            raise _error(400, "invalid_sample", "need at least one labeled sample")
        try:
            report = evaluate(model, split)
        except LabelMismatch as exc:
            raise _error(400, "LabelMismatch", str(exc))
        return report.to_dict()

    # -- streaming classification ---------------------------------------------

    @app.websocket("/api/v1/stream/{model_id}")
    async def classify_stream(ws: WebSocket, model_id: str):
        if token is not None and ws.headers.get("authorization", "") != f"Bearer {token}":
            await ws.accept()
            await ws.close(code=WS_UNAUTHORIZED, reason="unauthorized")
            return
        try:
            model = registry.load(model_id)
        except NotFound:
            await ws.accept()
            await ws.close(code=WS_MODEL_NOT_FOUND, reason=f"model {model_id!r} not found")
            return
        await ws.accept()
        last_t: int | None = None
        served = 0
        try:
            while True:
                record = await ws.receive_json()
                try:
                    frame = frame_from_record(record)
                except (ParseError, InvalidArgument) as exc:
                    await ws.send_json({"error": {"code": "invalid_frame", "message": str(exc)}})
                    continue
                if last_t is not None and frame.timestamp_ms <= last_t:
                    await ws.send_json({"error": {
                        "code": "out_of_order",
                        "message": f"t_ms {frame.timestamp_ms} not after {last_t}"}})
                    continue
                last_t = frame.timestamp_ms
                t0 = time.perf_counter()
                ranked = await run_in_threadpool(predict, model, [frame])
                app.state.stream_latencies.append((time.perf_counter() - t0) * 1000.0)
                served += 1
                await ws.send_json({"t_ms": frame.timestamp_ms,
                                    "top": [{"label": label, "p": p} for label, p in ranked]})
        except WebSocketDisconnect:
            log.info("stream closed for model %s after %d frames", model_id, served)

    return app
