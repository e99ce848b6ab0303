"""Per-frame inference latency benchmark over the normalize -> embed -> head path."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from ..gesture import GestureModel, predict
from ..landmarks import FrameLandmarks


@dataclass
class LatencyStats:
    count: int
    p50_ms: float
    p95_ms: float
    max_ms: float

    def to_dict(self) -> dict:
        return {"count": self.count, "p50_ms": self.p50_ms,
                "p95_ms": self.p95_ms, "max_ms": self.max_ms}

    @classmethod
    def empty(cls) -> "LatencyStats":
        return cls(count=0, p50_ms=0.0, p95_ms=0.0, max_ms=0.0)

    @classmethod
    def from_samples_ms(cls, samples_ms: list[float]) -> "LatencyStats":
        if not samples_ms:
            return cls.empty()
        arr = np.asarray(samples_ms)
        return cls(count=len(samples_ms),
                   p50_ms=float(np.percentile(arr, 50)),
                   p95_ms=float(np.percentile(arr, 95)),
                   max_ms=float(arr.max()))


def bench_latency(model: GestureModel, frames: list[FrameLandmarks],
                  repetitions: int) -> LatencyStats:
    """Time predict() per frame; landmark detection is out of scope here."""
    if repetitions < 0:
        raise ValueError("repetitions must be >= 0")
    samples_ms: list[float] = []
    for _ in range(repetitions):
        for frame in frames:
            t0 = time.perf_counter()
            predict(model, [frame])
            samples_ms.append((time.perf_counter() - t0) * 1000.0)
    return LatencyStats.from_samples_ms(samples_ms)
