"""Timing comparison between the compiled kernels and the numpy reference."""

from __future__ import annotations

import time

import numpy as np

from . import IMPLEMENTATION, _ref


def _fast_module():
    try:
        from .. import _fastk
        return _fastk
    except ImportError:
        return None


def _time(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best * 1000.0


def kernel_benchmark(t_steps: int = 40, hidden: int = 64, alphabet: int = 12,
                     target_len: int = 4, repeats: int = 20, seed: int = 0) -> list[dict]:
    """Per-kernel best-of-N wall times (ms) for both implementations."""
    rng = np.random.default_rng(seed)
    fast = _fast_module()
    rows: list[dict] = []

    xwb = rng.normal(size=(t_steps, 4 * hidden))
    u = rng.normal(size=(hidden, 4 * hidden)) * 0.3
    h, c, gates = _ref.lstm_recurrence_fwd(xwb, u)
    dh = rng.normal(size=(t_steps, hidden))

    logits = rng.normal(size=(t_steps, alphabet + 1))
    lp = logits - np.log(np.exp(logits).sum(axis=1, keepdims=True))
    lp = np.ascontiguousarray(lp)
    ext = np.zeros(2 * target_len + 1, dtype=np.int64)
    ext[1::2] = rng.integers(1, alphabet + 1, size=target_len)

    cases = [
        ("lstm_recurrence_fwd", lambda mod: mod.lstm_recurrence_fwd(xwb, u)),
        ("lstm_recurrence_bwd", lambda mod: mod.lstm_recurrence_bwd(u, h, c, gates, dh)),
        ("ctc_forward_backward", lambda mod: mod.ctc_forward_backward(lp, ext)),
    ]
    for name, call in cases:
        ref_ms = _time(lambda: call(_ref), repeats)
        row = {"kernel": name, "shape": f"T={t_steps},H={hidden}",
               "reference_ms": round(ref_ms, 4), "compiled_ms": None, "speedup": None}
        if fast is not None:
            fast_ms = _time(lambda: call(fast), repeats)
            row["compiled_ms"] = round(fast_ms, 4)
            row["speedup"] = round(ref_ms / fast_ms, 2) if fast_ms > 0 else None
        rows.append(row)
    return rows


def format_table(rows: list[dict]) -> str:
    lines = [f"active implementation: {IMPLEMENTATION}",
             f"{'kernel':24} {'shape':14} {'reference':>12} {'compiled':>12} {'speedup':>8}"]
    for r in rows:
        compiled = f"{r['compiled_ms']:.3f} ms" if r["compiled_ms"] is not None else "n/a"
        speedup = f"{r['speedup']:.1f}x" if r["speedup"] is not None else "n/a"
        lines.append(f"{r['kernel']:24} {r['shape']:14} {r['reference_ms']:>9.3f} ms "
                     f"{compiled:>12} {speedup:>8}")
    return "\n".join(lines)
