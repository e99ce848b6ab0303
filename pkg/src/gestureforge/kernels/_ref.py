"""Pure-numpy reference kernels for the recurrent and CTC hot loops.

Same contracts as the compiled versions in gestureforge._fastk; this module is
the import-time fallback and the ground truth the extension is tested against.
"""

from __future__ import annotations

import numpy as np

NEG_INF = -np.inf


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def lstm_recurrence_fwd(xwb: np.ndarray, u: np.ndarray):
    """Run the LSTM recurrence given precomputed input projections.

    xwb: (T, 4H) rows of x[t] @ W + b, gate order [i, f, g, o].
    u:   (H, 4H) recurrent weights.
    Returns (h, c, gates) with post-activation gates, each (T, *).
    """
    t_steps, four_h = xwb.shape
    hidden = four_h // 4
    h = np.zeros((t_steps, hidden))
    c = np.zeros((t_steps, hidden))
    gates = np.zeros((t_steps, four_h))
    h_prev = np.zeros(hidden)
    c_prev = np.zeros(hidden)
    for t in range(t_steps):
        a = xwb[t] + h_prev @ u
        i = _sigmoid(a[:hidden])
        f = _sigmoid(a[hidden:2 * hidden])
        g = np.tanh(a[2 * hidden:3 * hidden])
        o = _sigmoid(a[3 * hidden:])
        c_t = f * c_prev + i * g
        h_t = o * np.tanh(c_t)
        gates[t, :hidden] = i
        gates[t, hidden:2 * hidden] = f
        gates[t, 2 * hidden:3 * hidden] = g
        gates[t, 3 * hidden:] = o
        c[t] = c_t
        h[t] = h_t
        h_prev, c_prev = h_t, c_t
    return h, c, gates


def lstm_recurrence_bwd(u: np.ndarray, h: np.ndarray, c: np.ndarray,
                        gates: np.ndarray, dh_out: np.ndarray) -> np.ndarray:
    """Backward pass of the recurrence; returns dA (T, 4H), the gradient
    w.r.t. the pre-activation gate inputs (so dW/dU/db reduce to matmuls)."""
    t_steps, hidden = h.shape
    da = np.zeros((t_steps, 4 * hidden))
    dh_next = np.zeros(hidden)
    dc_next = np.zeros(hidden)
    for t in range(t_steps - 1, -1, -1):
        i = gates[t, :hidden]
        f = gates[t, hidden:2 * hidden]
        g = gates[t, 2 * hidden:3 * hidden]
        o = gates[t, 3 * hidden:]
        c_prev = c[t - 1] if t > 0 else np.zeros(hidden)
        tc = np.tanh(c[t])
        dh = dh_out[t] + dh_next
        dc = dc_next + dh * o * (1.0 - tc * tc)
        da_t = da[t]
        da_t[:hidden] = dc * g * i * (1.0 - i)
        da_t[hidden:2 * hidden] = dc * c_prev * f * (1.0 - f)
        da_t[2 * hidden:3 * hidden] = dc * i * (1.0 - g * g)
        da_t[3 * hidden:] = dh * tc * o * (1.0 - o)
        dh_next = da_t @ u.T
        dc_next = dc * f
    return da


def ctc_forward_backward(log_probs: np.ndarray, labels_ext: np.ndarray):
    """Log-space CTC forward-backward over an expanded label sequence.

    log_probs: (T, K) per-step log-softmax rows; labels_ext: (S,) expanded
    target with blanks (index 0) interleaved. The target must be feasible.
    Returns (loss, grad) with grad taken w.r.t. the logits that produced
    log_probs, i.e. exp(log_probs) - posterior.
    """
    t_steps, num_sym = log_probs.shape
    s_len = labels_ext.shape[0]
    alpha = np.full((t_steps, s_len), NEG_INF)
    beta = np.full((t_steps, s_len), NEG_INF)
    alpha[0, 0] = log_probs[0, labels_ext[0]]
    if s_len > 1:
        alpha[0, 1] = log_probs[0, labels_ext[1]]
    for t in range(1, t_steps):
        for s in range(s_len):
            acc = alpha[t - 1, s]
            if s >= 1:
                acc = np.logaddexp(acc, alpha[t - 1, s - 1])
            if s >= 2 and labels_ext[s] != 0 and labels_ext[s] != labels_ext[s - 2]:
                acc = np.logaddexp(acc, alpha[t - 1, s - 2])
            alpha[t, s] = acc + log_probs[t, labels_ext[s]]
    log_p = alpha[t_steps - 1, s_len - 1]
    if s_len > 1:
        log_p = np.logaddexp(log_p, alpha[t_steps - 1, s_len - 2])

    beta[t_steps - 1, s_len - 1] = 0.0
    if s_len > 1:
        beta[t_steps - 1, s_len - 2] = 0.0
    for t in range(t_steps - 2, -1, -1):
        for s in range(s_len):
            acc = beta[t + 1, s] + log_probs[t + 1, labels_ext[s]]
            if s + 1 < s_len:
                acc = np.logaddexp(acc, beta[t + 1, s + 1] + log_probs[t + 1, labels_ext[s + 1]])
            if s + 2 < s_len and labels_ext[s + 2] != 0 and labels_ext[s + 2] != labels_ext[s]:
                acc = np.logaddexp(acc, beta[t + 1, s + 2] + log_probs[t + 1, labels_ext[s + 2]])
            beta[t, s] = acc

    # posterior over symbols: gamma[t, k] = logsumexp_{s: lab[s]=k} alpha+beta
    gamma = np.full((t_steps, num_sym), NEG_INF)
    for s in range(s_len):
        k = labels_ext[s]
        np.logaddexp(gamma[:, k], alpha[:, s] + beta[:, s], out=gamma[:, k])
    grad = np.exp(log_probs) - np.exp(gamma - log_p)
    return float(-log_p), grad
