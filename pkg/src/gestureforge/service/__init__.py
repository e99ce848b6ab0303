from .app import create_app
from .bench import LatencyStats, bench_latency
from .jobs import JobRunner, JobState, TrainingJob
from .store import ModelRegistry, ProjectStore

__all__ = [
    "create_app",
    "bench_latency",
    "LatencyStats",
    "JobRunner",
    "JobState",
    "TrainingJob",
    "ModelRegistry",
    "ProjectStore",
]
