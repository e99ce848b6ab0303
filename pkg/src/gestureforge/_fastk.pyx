# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled LSTM-recurrence and CTC forward-backward kernels.

Drop-in replacements for gestureforge.kernels._ref; selected at import time.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, tanh, log, log1p, fabs, INFINITY

cnp.import_array()


cdef inline double _sigmoid(double x) nogil:
    return 1.0 / (1.0 + exp(-x))


cdef inline double _logaddexp(double a, double b) nogil:
    if a == -INFINITY:
        return b
    if b == -INFINITY:
        return a
    if a > b:
        return a + log1p(exp(b - a))
    return b + log1p(exp(a - b))


def lstm_recurrence_fwd(double[:, ::1] xwb, double[:, ::1] u):
    """LSTM recurrence over precomputed input projections (gate order i,f,g,o)."""
    cdef Py_ssize_t t_steps = xwb.shape[0]
    cdef Py_ssize_t four_h = xwb.shape[1]
    cdef Py_ssize_t hidden = four_h // 4
    h_arr = np.zeros((t_steps, hidden))
    c_arr = np.zeros((t_steps, hidden))
    g_arr = np.zeros((t_steps, four_h))
    cdef double[:, ::1] h = h_arr
    cdef double[:, ::1] c = c_arr
    cdef double[:, ::1] gates = g_arr
    a_arr = np.zeros(four_h)
    cdef double[::1] a = a_arr
    cdef Py_ssize_t t, j, k
    cdef double i_g, f_g, g_g, o_g, c_t, hp

    with nogil:
        for t in range(t_steps):
            for k in range(four_h):
                a[k] = xwb[t, k]
            if t > 0:
                for j in range(hidden):
                    hp = h[t - 1, j]
                    if hp != 0.0:
                        for k in range(four_h):
                            a[k] += hp * u[j, k]
            for j in range(hidden):
                i_g = _sigmoid(a[j])
                f_g = _sigmoid(a[hidden + j])
                g_g = tanh(a[2 * hidden + j])
                o_g = _sigmoid(a[3 * hidden + j])
                c_t = i_g * g_g
                if t > 0:
                    c_t += f_g * c[t - 1, j]
                gates[t, j] = i_g
                gates[t, hidden + j] = f_g
                gates[t, 2 * hidden + j] = g_g
                gates[t, 3 * hidden + j] = o_g
                c[t, j] = c_t
                h[t, j] = o_g * tanh(c_t)
    return h_arr, c_arr, g_arr


def lstm_recurrence_bwd(double[:, ::1] u, double[:, ::1] h, double[:, ::1] c,
                        double[:, ::1] gates, double[:, ::1] dh_out):
    """Gradient w.r.t. the pre-activation gate inputs, shape (T, 4H)."""
    cdef Py_ssize_t t_steps = h.shape[0]
    cdef Py_ssize_t hidden = h.shape[1]
    da_arr = np.zeros((t_steps, 4 * hidden))
    cdef double[:, ::1] da = da_arr
    dh_next_arr = np.zeros(hidden)
    dc_next_arr = np.zeros(hidden)
    cdef double[::1] dh_next = dh_next_arr
    cdef double[::1] dc_next = dc_next_arr
    cdef Py_ssize_t t, j, k
    cdef double i_g, f_g, g_g, o_g, tc, dh, dc, c_prev, da_v

    with nogil:
        for t in range(t_steps - 1, -1, -1):
            for j in range(hidden):
                i_g = gates[t, j]
                f_g = gates[t, hidden + j]
                g_g = gates[t, 2 * hidden + j]
                o_g = gates[t, 3 * hidden + j]
                c_prev = c[t - 1, j] if t > 0 else 0.0
                tc = tanh(c[t, j])
                dh = dh_out[t, j] + dh_next[j]
                dc = dc_next[j] + dh * o_g * (1.0 - tc * tc)
                da[t, j] = dc * g_g * i_g * (1.0 - i_g)
                da[t, hidden + j] = dc * c_prev * f_g * (1.0 - f_g)
                da[t, 2 * hidden + j] = dc * i_g * (1.0 - g_g * g_g)
                da[t, 3 * hidden + j] = dh * tc * o_g * (1.0 - o_g)
                dc_next[j] = dc * f_g
            for j in range(hidden):
                da_v = 0.0
                for k in range(4 * hidden):
                    da_v += da[t, k] * u[j, k]
                dh_next[j] = da_v
    return da_arr


def ctc_forward_backward(double[:, ::1] log_probs, cnp.int64_t[::1] labels_ext):
    """Log-space CTC over an expanded (blank-interleaved) label sequence.

    Returns (loss, grad-w.r.t.-logits); target feasibility is the caller's job.
    """
    cdef Py_ssize_t t_steps = log_probs.shape[0]
    cdef Py_ssize_t num_sym = log_probs.shape[1]
    cdef Py_ssize_t s_len = labels_ext.shape[0]
    alpha_arr = np.full((t_steps, s_len), -np.inf)
    beta_arr = np.full((t_steps, s_len), -np.inf)
    gamma_arr = np.full((t_steps, num_sym), -np.inf)
    grad_arr = np.empty((t_steps, num_sym))
    cdef double[:, ::1] alpha = alpha_arr
    cdef double[:, ::1] beta = beta_arr
    cdef double[:, ::1] gamma = gamma_arr
    cdef double[:, ::1] grad = grad_arr
    cdef Py_ssize_t t, s, k
    cdef double acc, log_p

    with nogil:
        alpha[0, 0] = log_probs[0, labels_ext[0]]
        if s_len > 1:
            alpha[0, 1] = log_probs[0, labels_ext[1]]
        for t in range(1, t_steps):
            for s in range(s_len):
                acc = alpha[t - 1, s]
                if s >= 1:
                    acc = _logaddexp(acc, alpha[t - 1, s - 1])
                if s >= 2 and labels_ext[s] != 0 and labels_ext[s] != labels_ext[s - 2]:
                    acc = _logaddexp(acc, alpha[t - 1, s - 2])
                alpha[t, s] = acc + log_probs[t, labels_ext[s]]
        log_p = alpha[t_steps - 1, s_len - 1]
        if s_len > 1:
            log_p = _logaddexp(log_p, alpha[t_steps - 1, s_len - 2])

        beta[t_steps - 1, s_len - 1] = 0.0
        if s_len > 1:
            beta[t_steps - 1, s_len - 2] = 0.0
        for t in range(t_steps - 2, -1, -1):
            for s in range(s_len):
                acc = beta[t + 1, s] + log_probs[t + 1, labels_ext[s]]
                if s + 1 < s_len:
                    acc = _logaddexp(acc, beta[t + 1, s + 1] + log_probs[t + 1, labels_ext[s + 1]])
                if s + 2 < s_len and labels_ext[s + 2] != 0 and labels_ext[s + 2] != labels_ext[s]:
                    acc = _logaddexp(acc, beta[t + 1, s + 2] + log_probs[t + 1, labels_ext[s + 2]])
                beta[t, s] = acc

        for t in range(t_steps):
            for s in range(s_len):
                k = labels_ext[s]
                gamma[t, k] = _logaddexp(gamma[t, k], alpha[t, s] + beta[t, s])
            for k in range(num_sym):
                if gamma[t, k] == -INFINITY:
                    grad[t, k] = exp(log_probs[t, k])
                else:
                    grad[t, k] = exp(log_probs[t, k]) - exp(gamma[t, k] - log_p)
    return float(-log_p), grad_arr
