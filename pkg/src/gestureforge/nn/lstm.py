"""LSTM cell/sequence forward+backward and the bidirectional wrapper.

The per-step recurrence runs through gestureforge.kernels (compiled when
available); input projections and weight-gradient reductions stay in numpy
so both kernel implementations share the same BLAS paths.
Gate order everywhere is [input, forget, candidate, output].
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import kernels
from ..errors import ShapeMismatch
from .layers import glorot_uniform


@dataclass
class LstmParams:
    w: np.ndarray   # (input_dim, 4H)
    u: np.ndarray   # (H, 4H)
    b: np.ndarray   # (4H,)
    dw: np.ndarray = field(default=None, repr=False)
    du: np.ndarray = field(default=None, repr=False)
    db: np.ndarray = field(default=None, repr=False)
    kind = "lstm"

    def __post_init__(self):
        if self.dw is None:
            self.dw = np.zeros_like(self.w)
        if self.du is None:
            self.du = np.zeros_like(self.u)
        if self.db is None:
            self.db = np.zeros_like(self.b)

    @property
    def hidden(self) -> int:
        return self.u.shape[0]

    @classmethod
    def create(cls, input_dim: int, hidden: int, rng: np.random.Generator) -> "LstmParams":
        w = glorot_uniform(input_dim, 4 * hidden, rng)
        u = glorot_uniform(hidden, 4 * hidden, rng)
        b = np.zeros(4 * hidden)
        b[hidden:2 * hidden] = 1.0  # forget-gate bias, standard stability default
        return cls(w=w, u=u, b=b)

    def params(self) -> list[np.ndarray]:
        return [self.w, self.u, self.b]

    def grads(self) -> list[np.ndarray]:
        return [self.dw, self.du, self.db]

    def zero_grads(self):
        self.dw[...] = 0.0
        self.du[...] = 0.0
        self.db[...] = 0.0

    def clone(self) -> "LstmParams":
        return LstmParams(w=self.w.copy(), u=self.u.copy(), b=self.b.copy())

    def arrays(self) -> dict[str, np.ndarray]:
        return {"w": self.w, "u": self.u, "b": self.b}

    @classmethod
    def restore(cls, arrays: dict[str, np.ndarray]) -> "LstmParams":
        return cls(w=arrays["w"].copy(), u=arrays["u"].copy(), b=arrays["b"].copy())


def lstm_cell_fwd(x: np.ndarray, h_prev: np.ndarray, c_prev: np.ndarray, p: LstmParams):
    """Single LSTM step on one input vector; returns (h, c, cache)."""
    hidden = p.hidden
    a = x @ p.w + h_prev @ p.u + p.b
    i = 1.0 / (1.0 + np.exp(-a[:hidden]))
    f = 1.0 / (1.0 + np.exp(-a[hidden:2 * hidden]))
    g = np.tanh(a[2 * hidden:3 * hidden])
    o = 1.0 / (1.0 + np.exp(-a[3 * hidden:]))
    c = f * c_prev + i * g
    h = o * np.tanh(c)
    return h, c, (x, h_prev, c_prev, i, f, g, o, c)


def lstm_cell_bwd(dh: np.ndarray, dc: np.ndarray, cache, p: LstmParams):
    """Backward of one step; accumulates dW/dU/db, returns (dx, dh_prev, dc_prev)."""
    x, h_prev, c_prev, i, f, g, o, c = cache
    hidden = p.hidden
    tc = np.tanh(c)
    dc_total = dc + dh * o * (1.0 - tc * tc)
    da = np.concatenate([
        dc_total * g * i * (1.0 - i),
        dc_total * c_prev * f * (1.0 - f),
        dc_total * i * (1.0 - g * g),
        dh * tc * o * (1.0 - o),
    ])
    p.dw += np.outer(x, da)
    p.du += np.outer(h_prev, da)
    p.db += da
    return da @ p.w.T, da @ p.u.T, dc_total * f


def lstm_seq_fwd(x: np.ndarray, p: LstmParams):
    """Full-sequence forward: x (T, D) -> hidden states (T, H) plus cache."""
    if x.ndim != 2 or x.shape[1] != p.w.shape[0]:
        raise ShapeMismatch(f"lstm_seq_fwd: input {x.shape} vs W {p.w.shape}")
    xwb = x @ p.w + p.b
    h, c, gates = kernels.lstm_recurrence_fwd(np.ascontiguousarray(xwb), p.u)
    return h, (x, h, c, gates)


def lstm_seq_bwd(dh_out: np.ndarray, cache, p: LstmParams) -> np.ndarray:
    """Full-sequence BPTT; accumulates dW/dU/db and returns dx (T, D)."""
    x, h, c, gates = cache
    da = kernels.lstm_recurrence_bwd(p.u, h, c, gates, np.ascontiguousarray(dh_out))
    h_prev = np.vstack([np.zeros((1, p.hidden)), h[:-1]])
    p.dw += x.T @ da
    p.du += h_prev.T @ da
    p.db += da.sum(axis=0)
    return da @ p.w.T


def bilstm_fwd(x: np.ndarray, p_fw: LstmParams, p_bw: LstmParams):
    """Bidirectional pass: output row t is [forward h_t, backward h_t]."""
    if p_fw.hidden != p_bw.hidden:
        raise ShapeMismatch("forward/backward hidden sizes differ")
    h_fw, cache_fw = lstm_seq_fwd(x, p_fw)
    h_bw_rev, cache_bw = lstm_seq_fwd(x[::-1], p_bw)
    out = np.concatenate([h_fw, h_bw_rev[::-1]], axis=1)
    return out, (cache_fw, cache_bw)


def bilstm_bwd(dout: np.ndarray, cache, p_fw: LstmParams, p_bw: LstmParams) -> np.ndarray:
    cache_fw, cache_bw = cache
    hidden = p_fw.hidden
    dx_fw = lstm_seq_bwd(dout[:, :hidden], cache_fw, p_fw)
    dx_bw = lstm_seq_bwd(dout[::-1, hidden:], cache_bw, p_bw)
    return dx_fw + dx_bw[::-1]
