import numpy as np
import pytest

from gestureforge import kernels
from gestureforge.kernels import _ref
from gestureforge.nn import (
    LstmParams,
    bilstm_bwd,
    bilstm_fwd,
    grad_check,
    lstm_cell_bwd,
    lstm_cell_fwd,
    lstm_seq_bwd,
    lstm_seq_fwd,
)


def make_params(input_dim, hidden, rng, scale=None):
    p = LstmParams.create(input_dim, hidden, rng)
    if scale is not None:
        p.w *= scale
        p.u *= scale
    return p


class TestLstmContracts:
    def test_zero_weights_give_zero_states(self):
        p = LstmParams(w=np.zeros((3, 8)), u=np.zeros((2, 8)), b=np.zeros(8))
        x = np.ones((6, 3))
        h, _ = lstm_seq_fwd(x, p)
        np.testing.assert_array_equal(h, np.zeros((6, 2)))

    def test_cell_matches_sequence_step(self, rng):
        p = make_params(4, 3, rng)
        x = rng.normal(size=(5, 4))
        h_seq, cache = lstm_seq_fwd(x, p)
        h_prev = np.zeros(3)
        c_prev = np.zeros(3)
        for t in range(5):
            h_prev, c_prev, _ = lstm_cell_fwd(x[t], h_prev, c_prev, p)
            np.testing.assert_allclose(h_prev, h_seq[t], atol=1e-12)

    def test_bilstm_concat_structure(self, rng):
        p_fw = make_params(4, 3, rng)
        p_bw = make_params(4, 3, rng)
        x = rng.normal(size=(7, 4))
        out, _ = bilstm_fwd(x, p_fw, p_bw)
        assert out.shape == (7, 6)
        h_fw, _ = lstm_seq_fwd(x, p_fw)
        h_bw, _ = lstm_seq_fwd(x[::-1], p_bw)
        np.testing.assert_allclose(out[:, :3], h_fw, atol=1e-12)
        np.testing.assert_allclose(out[:, 3:], h_bw[::-1], atol=1e-12)

    def test_reversing_input_swaps_halves(self, rng):
        p_fw = make_params(4, 3, rng)
        p_bw = make_params(4, 3, rng)
        x = rng.normal(size=(6, 4))
        fwd_out, _ = bilstm_fwd(x, p_fw, p_bw)
        rev_out, _ = bilstm_fwd(x[::-1].copy(), p_bw, p_fw)
        np.testing.assert_allclose(rev_out[::-1, 3:], fwd_out[:, :3], atol=1e-12)
        np.testing.assert_allclose(rev_out[::-1, :3], fwd_out[:, 3:], atol=1e-12)

    def test_length_one_sequence(self, rng):
        p_fw = make_params(4, 3, rng)
        p_bw = make_params(4, 3, rng)
        x = rng.normal(size=(1, 4))
        out, _ = bilstm_fwd(x, p_fw, p_bw)
        h_fw, _ = lstm_seq_fwd(x, p_fw)
        h_bw, _ = lstm_seq_fwd(x, p_bw)
        np.testing.assert_allclose(out, np.concatenate([h_fw, h_bw], axis=1), atol=1e-12)


class TestLstmGradients:
    def test_cell_gradient(self, rng):
        p = make_params(3, 2, rng)
        x = rng.normal(size=3)
        h0 = rng.normal(size=2)
        c0 = rng.normal(size=2)
        proj_h = rng.normal(size=2)

        def loss():
            h, _, _ = lstm_cell_fwd(x, h0, c0, p)
            return float(h @ proj_h)

        h, c, cache = lstm_cell_fwd(x, h0, c0, p)
        p.zero_grads()
        dx, dh_prev, dc_prev = lstm_cell_bwd(proj_h, np.zeros(2), cache, p)
        err = grad_check(loss, [p.w, p.u, p.b, x, h0], [p.dw, p.du, p.db, dx, dh_prev])
        assert err < 1e-5

    def test_sequence_bptt_gradient(self, rng):
        p = make_params(3, 4, rng)
        x = rng.normal(size=(5, 3))
        proj = rng.normal(size=(5, 4))

        def loss():
            h, _ = lstm_seq_fwd(x, p)
            return float((h * proj).sum())

        h, cache = lstm_seq_fwd(x, p)
        p.zero_grads()
        dx = lstm_seq_bwd(proj, cache, p)
        err = grad_check(loss, [p.w, p.u, p.b, x], [p.dw, p.du, p.db, dx])
        assert err < 1e-5

    def test_bilstm_gradient(self, rng):
        p_fw = make_params(3, 2, rng)
        p_bw = make_params(3, 2, rng)
        x = rng.normal(size=(5, 3))
        proj = rng.normal(size=(5, 4))

        def loss():
            out, _ = bilstm_fwd(x, p_fw, p_bw)
            return float((out * proj).sum())

        out, cache = bilstm_fwd(x, p_fw, p_bw)
        p_fw.zero_grads()
        p_bw.zero_grads()
        dx = bilstm_bwd(proj, cache, p_fw, p_bw)
        err = grad_check(loss, [p_fw.w, p_fw.u, p_fw.b, p_bw.w, p_bw.u, p_bw.b, x],
                         [p_fw.dw, p_fw.du, p_fw.db, p_bw.dw, p_bw.du, p_bw.db, dx])
        assert err < 1e-5


class TestKernelParity:
    """The compiled extension and the numpy reference must agree."""

    def test_implementation_reported(self):
        assert kernels.IMPLEMENTATION in ("compiled", "reference")

    @pytest.mark.parametrize("t_steps,hidden", [(1, 3), (9, 5), (20, 8)])
    def test_recurrence_parity(self, rng, t_steps, hidden):
        xwb = rng.normal(size=(t_steps, 4 * hidden))
        u = rng.normal(size=(hidden, 4 * hidden)) * 0.4
        h_a, c_a, g_a = kernels.lstm_recurrence_fwd(xwb, u)
        h_b, c_b, g_b = _ref.lstm_recurrence_fwd(xwb, u)
        np.testing.assert_allclose(h_a, h_b, atol=1e-12)
        np.testing.assert_allclose(c_a, c_b, atol=1e-12)
        dh = rng.normal(size=(t_steps, hidden))
        da_a = kernels.lstm_recurrence_bwd(u, h_a, c_a, g_a, dh)
        da_b = _ref.lstm_recurrence_bwd(u, h_b, c_b, g_b, dh)
        np.testing.assert_allclose(da_a, da_b, atol=1e-12)
