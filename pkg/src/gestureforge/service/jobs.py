"""Training-job orchestration on a bounded worker pool."""

from __future__ import annotations

import threading
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

from ..embedder import EmbeddingModel
from ..errors import GestureForgeError
from ..gesture import TrainSpec
from ..workflow import run_kshot_training
from .store import ModelRegistry, NotFound, ProjectStore


class JobState(Enum):
    QUEUED = "queued"
    RUNNING = "running"
    SUCCEEDED = "succeeded"
    FAILED = "failed"


@dataclass
class TrainingJob:
    id: str
    project_id: str
    spec: TrainSpec
    state: JobState = JobState.QUEUED
    progress_epoch: int = 0
    result_model_id: str | None = None
    error: str | None = None
    eval_summary: dict | None = None
    created_ms: int = field(default_factory=lambda: int(time.time() * 1000))

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "project_id": self.project_id,
            "state": self.state.value,
            "progress_epoch": self.progress_epoch,
            "total_epochs": self.spec.epochs,
            "result_model_id": self.result_model_id,
            "error": self.error,
            "eval_summary": self.eval_summary,
            "spec": {"regime": self.spec.regime.value, "k": self.spec.k,
                     "seed": self.spec.seed, "epochs": self.spec.epochs,
                     "lr_head": self.spec.lr_head, "lr_embedder": self.spec.lr_embedder,
                     "batch_size": self.spec.batch_size},
            "created_ms": self.created_ms,
        }


class JobRunner:
    """Runs jobs through the shared K-shot workflow; at most `workers`
    trainings execute concurrently."""

    def __init__(self, store: ProjectStore, registry: ModelRegistry,
                 embedder: EmbeddingModel, workers: int = 1):
        self.store = store
        self.registry = registry
        self.embedder = embedder
        self._jobs: dict[str, TrainingJob] = {}
        self._guard = threading.Lock()
        self._pool = ThreadPoolExecutor(max_workers=max(1, workers),
                                        thread_name_prefix="gestureforge-train")

    def submit(self, project_id: str, spec: TrainSpec) -> TrainingJob:
        self.store.get(project_id)  # 404 before queueing
        job = TrainingJob(id=uuid.uuid4().hex[:12], project_id=project_id, spec=spec)
        with self._guard:
            self._jobs[job.id] = job
        self._pool.submit(self._run, job)
        return job

    def get(self, job_id: str) -> TrainingJob:
        with self._guard:
            if job_id not in self._jobs:
                raise NotFound(f"job {job_id!r} not found")
            return self._jobs[job_id]

    def list(self, project_id: str | None = None) -> list[TrainingJob]:
        with self._guard:
            jobs = list(self._jobs.values())
        if project_id is not None:
            jobs = [j for j in jobs if j.project_id == project_id]
        return sorted(jobs, key=lambda j: j.created_ms)

    def _run(self, job: TrainingJob):
        job.state = JobState.RUNNING
        try:
            project = self.store.get(job.project_id)
            samples = self.store.snapshot_samples(job.project_id)

            def on_epoch(epoch: int):
                job.progress_epoch = epoch + 1

            model, report, metadata = run_kshot_training(
                samples, self.embedder, job.spec,
                expected_classes=project.classes, progress=on_epoch)
            job.result_model_id = self.registry.save(model, metadata,
                                                     project_id=job.project_id)
            if report is not None:
                job.eval_summary = {
                    "sensitivity": report.sensitivity,
                    "specificity": report.specificity,
                    "ss_f1": report.ss_f1,
                    "complementary_ss_f1": report.complementary_ss_f1,
                    "eval_samples": report.confusion.total,
                }
            job.state = JobState.SUCCEEDED
        except GestureForgeError as exc:
            job.error = f"{type(exc).__name__}: {exc}"
            job.state = JobState.FAILED
        except Exception as exc:  # pragma: no cover - defensive
            job.error = f"internal: {type(exc).__name__}: {exc}"
            job.state = JobState.FAILED

    def shutdown(self):
        self._pool.shutdown(wait=True)
