"""Central-difference gradient checker for the analytic backward passes."""

from __future__ import annotations

from typing import Callable

import numpy as np


def grad_check(f: Callable[[], float], params: list[np.ndarray],
               analytic: list[np.ndarray], h: float = 1e-5) -> float:
    """Max relative error between analytic gradients and central differences.

    f re-evaluates the scalar loss from the current parameter values; params
    are perturbed in place (and restored). Relative error per element is
    |a - n| / max(1, |a|, |n|).
    """
    worst = 0.0
    for p, a in zip(params, analytic):
        flat_p = p.reshape(-1)
        flat_a = a.reshape(-1)
        for idx in range(flat_p.size):
            orig = flat_p[idx]
            flat_p[idx] = orig + h
            plus = f()
            flat_p[idx] = orig - h
            minus = f()
            flat_p[idx] = orig
            num = (plus - minus) / (2.0 * h)
            err = abs(flat_a[idx] - num) / max(1.0, abs(flat_a[idx]), abs(num))
            if err > worst:
                worst = err
    return worst
