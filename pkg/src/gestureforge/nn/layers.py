"""Dense-layer primitives with analytic gradients, double precision throughout.

Forward functions return (output, cache); backward functions consume the cache,
accumulate parameter gradients in place and return the input gradient.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import BatchTooSmall, ShapeMismatch


def glorot_uniform(fan_in: int, fan_out: int, rng: np.random.Generator) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


@dataclass
class AffineParams:
    w: np.ndarray
    b: np.ndarray
    dw: np.ndarray = field(default=None, repr=False)
    db: np.ndarray = field(default=None, repr=False)
    kind = "affine"

    def __post_init__(self):
        if self.dw is None:
            self.dw = np.zeros_like(self.w)
        if self.db is None:
            self.db = np.zeros_like(self.b)

    @classmethod
    def create(cls, fan_in: int, fan_out: int, rng: np.random.Generator) -> "AffineParams":
        return cls(w=glorot_uniform(fan_in, fan_out, rng), b=np.zeros(fan_out))

    def params(self) -> list[np.ndarray]:
        return [self.w, self.b]

    def grads(self) -> list[np.ndarray]:
        return [self.dw, self.db]

    def zero_grads(self):
        self.dw[...] = 0.0
        self.db[...] = 0.0

    def clone(self) -> "AffineParams":
        return AffineParams(w=self.w.copy(), b=self.b.copy())

    def arrays(self) -> dict[str, np.ndarray]:
        return {"w": self.w, "b": self.b}

    @classmethod
    def restore(cls, arrays: dict[str, np.ndarray]) -> "AffineParams":
        return cls(w=arrays["w"].copy(), b=arrays["b"].copy())


@dataclass
class BatchNormParams:
    gamma: np.ndarray
    beta: np.ndarray
    running_mean: np.ndarray
    running_var: np.ndarray
    momentum: float = 0.9
    eps: float = 1e-5
    dgamma: np.ndarray = field(default=None, repr=False)
    dbeta: np.ndarray = field(default=None, repr=False)
    kind = "batchnorm"

    def __post_init__(self):
        if self.dgamma is None:
            self.dgamma = np.zeros_like(self.gamma)
        if self.dbeta is None:
            self.dbeta = np.zeros_like(self.beta)

    @classmethod
    def create(cls, dim: int) -> "BatchNormParams":
        return cls(gamma=np.ones(dim), beta=np.zeros(dim),
                   running_mean=np.zeros(dim), running_var=np.ones(dim))

    def params(self) -> list[np.ndarray]:
        return [self.gamma, self.beta]

    def grads(self) -> list[np.ndarray]:
        return [self.dgamma, self.dbeta]

    def zero_grads(self):
        self.dgamma[...] = 0.0
        self.dbeta[...] = 0.0

    def clone(self) -> "BatchNormParams":
        return BatchNormParams(gamma=self.gamma.copy(), beta=self.beta.copy(),
                               running_mean=self.running_mean.copy(),
                               running_var=self.running_var.copy(),
                               momentum=self.momentum, eps=self.eps)

    def arrays(self) -> dict[str, np.ndarray]:
        return {"gamma": self.gamma, "beta": self.beta,
                "running_mean": self.running_mean, "running_var": self.running_var}

    @classmethod
    def restore(cls, arrays: dict[str, np.ndarray], momentum: float = 0.9, eps: float = 1e-5) -> "BatchNormParams":
        return cls(gamma=arrays["gamma"].copy(), beta=arrays["beta"].copy(),
                   running_mean=arrays["running_mean"].copy(),
                   running_var=arrays["running_var"].copy(),
                   momentum=momentum, eps=eps)


def _check_2d(x: np.ndarray, cols: int, what: str):
    if x.ndim != 2 or x.shape[1] != cols:
        raise ShapeMismatch(f"{what}: expected (*, {cols}), got {x.shape}")


def affine_fwd(x: np.ndarray, p: AffineParams):
    _check_2d(x, p.w.shape[0], "affine_fwd input")
    return x @ p.w + p.b, x


def affine_bwd(dout: np.ndarray, cache, p: AffineParams) -> np.ndarray:
    x = cache
    if dout.shape != (x.shape[0], p.w.shape[1]):
        raise ShapeMismatch(f"affine_bwd: dout {dout.shape} vs expected {(x.shape[0], p.w.shape[1])}")
    p.dw += x.T @ dout
    p.db += dout.sum(axis=0)
    return dout @ p.w.T


def batchnorm_fwd(x: np.ndarray, p: BatchNormParams, training: bool):
    _check_2d(x, p.gamma.shape[0], "batchnorm_fwd input")
    if training:
        if x.shape[0] < 2:
            raise BatchTooSmall(f"batchnorm training needs batch >= 2, got {x.shape[0]}")
        mean = x.mean(axis=0)
        var = x.var(axis=0)  # biased, matches what inference divides by
        inv_std = 1.0 / np.sqrt(var + p.eps)
        xhat = (x - mean) * inv_std
        p.running_mean[...] = p.momentum * p.running_mean + (1.0 - p.momentum) * mean
        p.running_var[...] = p.momentum * p.running_var + (1.0 - p.momentum) * var
        cache = ("train", x, xhat, mean, inv_std)
    else:
        inv_std = 1.0 / np.sqrt(p.running_var + p.eps)
        xhat = (x - p.running_mean) * inv_std
        cache = ("infer", inv_std)
    return p.gamma * xhat + p.beta, cache


def batchnorm_bwd(dout: np.ndarray, cache, p: BatchNormParams) -> np.ndarray:
    if cache[0] == "infer":
        _, inv_std = cache
        return dout * p.gamma * inv_std
    _, x, xhat, mean, inv_std = cache
    n = x.shape[0]
    p.dgamma += (dout * xhat).sum(axis=0)
    p.dbeta += dout.sum(axis=0)
    dxhat = dout * p.gamma
    # standard batchnorm gradient, folded form
    return (inv_std / n) * (n * dxhat - dxhat.sum(axis=0) - xhat * (dxhat * xhat).sum(axis=0))


def relu_fwd(x: np.ndarray):
    return np.maximum(x, 0.0), x


def relu_bwd(dout: np.ndarray, cache) -> np.ndarray:
    return dout * (cache > 0)


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax, shift-stabilized."""
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def log_softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def cross_entropy_fwd(logits: np.ndarray, labels: np.ndarray):
    """Mean softmax cross-entropy over the batch.

    Returns (loss, cache); labels are integer class indices.
    """
    if logits.ndim != 2 or labels.shape != (logits.shape[0],):
        raise ShapeMismatch(f"cross_entropy: logits {logits.shape} vs labels {labels.shape}")
    lsm = log_softmax(logits)
    n = logits.shape[0]
    loss = -float(lsm[np.arange(n), labels].mean())
    return loss, (lsm, labels)


def cross_entropy_bwd(cache) -> np.ndarray:
    """Gradient of the mean cross-entropy w.r.t. the logits."""
    lsm, labels = cache
    n = lsm.shape[0]
    grad = np.exp(lsm)
    grad[np.arange(n), labels] -= 1.0
    return grad / n
