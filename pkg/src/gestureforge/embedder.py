"""Single-hand embedding model: normalized landmarks + handedness -> 128-d vector.

Two-hand frames are fused by elementwise addition of the per-hand embeddings,
which makes the result exactly invariant to hand order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidArgument, NoHands
from .landmarks import FrameLandmarks, Handedness, NormalizationConfig, normalize_landmarks
from .nn import (
    AffineParams,
    BatchNormParams,
    affine_bwd,
    affine_fwd,
    batchnorm_bwd,
    batchnorm_fwd,
    relu_bwd,
    relu_fwd,
)

EMBEDDING_DIM = 128
INPUT_DIM = 64  # 63 normalized coordinates + 1 signed handedness flag


@dataclass(frozen=True)
class EmbeddingConfig:
    input_dim: int = INPUT_DIM
    hidden_dims: tuple[int, ...] = (256, 256)
    embedding_dim: int = EMBEDDING_DIM
    use_batchnorm: bool = True

    def __post_init__(self):
        if self.embedding_dim != EMBEDDING_DIM:
            raise InvalidArgument(f"embedding_dim is fixed at {EMBEDDING_DIM}")
        if self.input_dim != INPUT_DIM:
            raise InvalidArgument(f"input_dim is fixed at {INPUT_DIM}")
        if any(h < 1 for h in self.hidden_dims):
            raise InvalidArgument("hidden_dims must be positive")
        object.__setattr__(self, "hidden_dims", tuple(int(h) for h in self.hidden_dims))


@dataclass
class EmbeddingModel:
    """Hidden blocks of affine (+ batchnorm) + ReLU, then a linear projection."""

    config: EmbeddingConfig
    affines: list[AffineParams]
    batchnorms: list[BatchNormParams]  # empty when use_batchnorm is False
    version: int = 1

    @classmethod
    def create(cls, config: EmbeddingConfig | None = None, seed: int = 0) -> "EmbeddingModel":
        config = config or EmbeddingConfig()
        rng = np.random.default_rng(seed)
        dims = [config.input_dim, *config.hidden_dims, config.embedding_dim]
        affines = [AffineParams.create(dims[i], dims[i + 1], rng) for i in range(len(dims) - 1)]
        bns = [BatchNormParams.create(h) for h in config.hidden_dims] if config.use_batchnorm else []
        return cls(config=config, affines=affines, batchnorms=bns)

    # -- training plumbing -------------------------------------------------

    def forward_batch(self, x: np.ndarray, training: bool):
        """(B, 64) -> (B, 128) with a cache for backward_batch."""
        caches = []
        h = x
        n_hidden = len(self.config.hidden_dims)
        for i in range(n_hidden):
            h, a_cache = affine_fwd(h, self.affines[i])
            bn_cache = None
            if self.batchnorms:
                h, bn_cache = batchnorm_fwd(h, self.batchnorms[i], training)
            h, r_cache = relu_fwd(h)
            caches.append((a_cache, bn_cache, r_cache))
        out, final_cache = affine_fwd(h, self.affines[-1])
        return out, (caches, final_cache)

    def backward_batch(self, dout: np.ndarray, cache) -> np.ndarray:
        caches, final_cache = cache
        dh = affine_bwd(dout, final_cache, self.affines[-1])
        for i in range(len(caches) - 1, -1, -1):
            a_cache, bn_cache, r_cache = caches[i]
            dh = relu_bwd(dh, r_cache)
            if bn_cache is not None:
                dh = batchnorm_bwd(dh, bn_cache, self.batchnorms[i])
            dh = affine_bwd(dh, a_cache, self.affines[i])
        return dh

    def param_layers(self) -> list:
        return [*self.affines, *self.batchnorms]

    def zero_grads(self):
        for layer in self.param_layers():
            layer.zero_grads()


def hand_features(frame: FrameLandmarks, cfg: NormalizationConfig | None = None) -> np.ndarray:
    """64-vector: normalized landmarks plus the signed handedness flag."""
    flag = -1.0 if frame.handedness is Handedness.LEFT else 1.0
    return np.concatenate([normalize_landmarks(frame, cfg), [flag]])


def embed_single(model: EmbeddingModel, frame: FrameLandmarks,
                 cfg: NormalizationConfig | None = None, training: bool = False) -> np.ndarray:
    out, _ = model.forward_batch(hand_features(frame, cfg)[None, :], training)
    return out[0]


def embed_frame(model: EmbeddingModel, hands: Sequence[FrameLandmarks],
                cfg: NormalizationConfig | None = None) -> np.ndarray:
    """One hand -> its embedding; two hands -> elementwise sum (order-invariant)."""
    if len(hands) == 0:
        raise NoHands("frame contains no hands")
    if len(hands) > 2:
        raise InvalidArgument(f"at most two hands per frame, got {len(hands)}")
    total = embed_single(model, hands[0], cfg)
    for hand in hands[1:]:
        total = total + embed_single(model, hand, cfg)
    return total


def clone_weights(model: EmbeddingModel) -> EmbeddingModel:
    """Value-equal, independently mutable copy."""
    return EmbeddingModel(
        config=model.config,
        affines=[a.clone() for a in model.affines],
        batchnorms=[b.clone() for b in model.batchnorms],
        version=model.version,
    )


def randomize(model: EmbeddingModel, seed: int) -> EmbeddingModel:
    """Fresh model of the same architecture, reinitialized from the seed."""
    return EmbeddingModel.create(model.config, seed=seed)
