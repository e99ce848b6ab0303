"""Kernel dispatch: compiled extension if available, numpy reference otherwise.

Set GESTUREFORGE_PURE_PYTHON=1 to force the reference implementation.
"""

import os

from . import _ref

IMPLEMENTATION = "reference"

if os.environ.get("GESTUREFORGE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from .. import _fastk

        lstm_recurrence_fwd = _fastk.lstm_recurrence_fwd
        lstm_recurrence_bwd = _fastk.lstm_recurrence_bwd
        ctc_forward_backward = _fastk.ctc_forward_backward
        IMPLEMENTATION = "compiled"
    except ImportError:
        pass

if IMPLEMENTATION == "reference":
    lstm_recurrence_fwd = _ref.lstm_recurrence_fwd
    lstm_recurrence_bwd = _ref.lstm_recurrence_bwd
    ctc_forward_backward = _ref.ctc_forward_backward

__all__ = [
    "IMPLEMENTATION",
    "lstm_recurrence_fwd",
    "lstm_recurrence_bwd",
    "ctc_forward_backward",
]
