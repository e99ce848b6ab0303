"""Custom gesture classifier: dense head over the hand embedding, N+1 classes
(index 0 = background), trained from K examples per gesture under one of three
embedder weight regimes (fine-tuned / frozen / random-init)."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .embedder import EmbeddingModel, clone_weights, embed_frame, hand_features, randomize
from .errors import InsufficientData, InvalidArgument, LabelMismatch
from .landmarks import FrameLandmarks, NormalizationConfig
from .nn import (
    AdamState,
    AffineParams,
    adam_step,
    affine_bwd,
    affine_fwd,
    cross_entropy_bwd,
    cross_entropy_fwd,
    relu_bwd,
    relu_fwd,
    softmax,
)

BACKGROUND = "background"


class Regime(Enum):
    FINE_TUNED = "finetune"
    FROZEN = "frozen"
    RANDOM_INIT = "random"


@dataclass(frozen=True)
class GestureHeadConfig:
    num_gestures: int
    hidden_dims: tuple[int, ...] = (64,)
    dropout_rate: float = 0.2

    def __post_init__(self):
        if self.num_gestures < 1:
            raise InvalidArgument("need at least one gesture class")
        if not (0.0 <= self.dropout_rate < 1.0):
            raise InvalidArgument("dropout_rate must lie in [0, 1)")
        object.__setattr__(self, "hidden_dims", tuple(int(h) for h in self.hidden_dims))

    @property
    def num_classes(self) -> int:
        return self.num_gestures + 1


@dataclass(frozen=True)
class TrainSpec:
    regime: Regime
    k: int
    lr_head: float = 1e-3
    lr_embedder: float = 1e-4
    batch_size: int = 32
    epochs: int = 50
    seed: int = 0

    def __post_init__(self):
        if self.k < 1 or self.batch_size < 1 or self.epochs < 1:
            raise InvalidArgument("k, batch_size and epochs must be positive")
        if self.lr_head <= 0:
            raise InvalidArgument("lr_head must be > 0")
        if self.regime is Regime.FROZEN:
            object.__setattr__(self, "lr_embedder", 0.0)
        elif self.lr_embedder <= 0:
            raise InvalidArgument("lr_embedder must be > 0 outside the frozen regime")


@dataclass
class GestureModel:
    embedder: EmbeddingModel
    head: list[AffineParams]
    label_map: dict[int, str]  # class index -> name, index 0 = background
    norm_cfg: NormalizationConfig
    head_config: GestureHeadConfig

    def __post_init__(self):
        names = list(self.label_map.values())
        if len(set(names)) != len(names):
            raise InvalidArgument("label names must be unique")
        if self.label_map.get(0) != BACKGROUND:
            raise InvalidArgument("label index 0 must be 'background'")

    def head_forward(self, emb: np.ndarray, training: bool = False,
                     rng: np.random.Generator | None = None, dropout: float = 0.0):
        caches = []
        h = emb
        for layer in self.head[:-1]:
            h, a_cache = affine_fwd(h, layer)
            h, r_cache = relu_fwd(h)
            mask = None
            if training and dropout > 0.0:
                mask = (rng.random(h.shape) >= dropout) / (1.0 - dropout)
                h = h * mask
            caches.append((a_cache, r_cache, mask))
        logits, final_cache = affine_fwd(h, self.head[-1])
        return logits, (caches, final_cache)

    def head_backward(self, dlogits: np.ndarray, cache) -> np.ndarray:
        caches, final_cache = cache
        dh = affine_bwd(dlogits, final_cache, self.head[-1])
        for (a_cache, r_cache, mask), layer in zip(reversed(caches), reversed(self.head[:-1])):
            if mask is not None:
                dh = dh * mask
            dh = relu_bwd(dh, r_cache)
            dh = affine_bwd(dh, a_cache, layer)
        return dh


Sample = tuple[FrameLandmarks, str]


def kshot_sample(dataset: Sequence[Sample], k: int, seed: int) -> tuple[list[Sample], list[Sample]]:
    """Split into K train samples per gesture class plus K background negatives;
    everything else is the eval split. Deterministic given seed."""
    if k < 1:
        raise InvalidArgument("k must be >= 1")
    by_class: dict[str, list[int]] = {}
    for i, (_, label) in enumerate(dataset):
        by_class.setdefault(label, []).append(i)
    rng = np.random.default_rng([seed, 0x6B73686F])
    train_idx: list[int] = []
    for label in sorted(by_class):
        idxs = by_class[label]
        if len(idxs) < k:
            raise InsufficientData(f"class {label!r} has {len(idxs)} samples, need {k}")
        picked = rng.permutation(len(idxs))[:k]
        train_idx.extend(idxs[j] for j in picked)
    chosen = set(train_idx)
    train = [dataset[i] for i in sorted(train_idx)]
    evals = [dataset[i] for i in range(len(dataset)) if i not in chosen]
    return train, evals


def _label_indices(labels: list[str]) -> dict[int, str]:
    gestures = sorted(set(labels) - {BACKGROUND})
    return {0: BACKGROUND, **{i + 1: name for i, name in enumerate(gestures)}}


def train(pretrained: EmbeddingModel, data: Sequence[Sample], cfg: GestureHeadConfig,
          spec: TrainSpec, norm_cfg: NormalizationConfig | None = None,
          progress=None) -> GestureModel:
    """Train a gesture model under the given weight regime.

    Frozen keeps the embedder bit-identical to `pretrained`; random-init
    ignores `pretrained` and reinitializes from spec.seed; fine-tuned updates
    the embedder and the head with their separate learning rates.
    """
    if not data:
        raise InvalidArgument("training data must be non-empty")
    norm_cfg = norm_cfg or NormalizationConfig()
    label_map = _label_indices([label for _, label in data])
    if len(label_map) != cfg.num_classes:
        raise LabelMismatch(
            f"data has {len(label_map)} classes (incl. background), head expects {cfg.num_classes}")
    name_to_idx = {name: i for i, name in label_map.items()}

    if spec.regime is Regime.RANDOM_INIT:
        emb_model = randomize(pretrained, spec.seed)
    else:
        emb_model = clone_weights(pretrained)

    rng = np.random.default_rng([spec.seed, 0x68656164])
    dims = [emb_model.config.embedding_dim, *cfg.hidden_dims, cfg.num_classes]
    head = [AffineParams.create(dims[i], dims[i + 1], rng) for i in range(len(dims) - 1)]
    model = GestureModel(embedder=emb_model, head=head, label_map=label_map,
                         norm_cfg=norm_cfg, head_config=cfg)

    x_all = np.stack([hand_features(frame, norm_cfg) for frame, _ in data])
    y_all = np.array([name_to_idx[label] for _, label in data], dtype=np.int64)

    head_params = [p for layer in head for p in layer.params()]
    head_grads = [g for layer in head for g in layer.grads()]
    head_state = AdamState.create(head_params, lr=spec.lr_head)
    train_embedder = spec.regime is not Regime.FROZEN
    if train_embedder:
        emb_params = [p for layer in emb_model.param_layers() for p in layer.params()]
        emb_grads = [g for layer in emb_model.param_layers() for g in layer.grads()]
        emb_state = AdamState.create(emb_params, lr=spec.lr_embedder)

    for epoch in range(spec.epochs):
        order = rng.permutation(len(data))
        for start in range(0, len(order), spec.batch_size):
            batch = order[start:start + spec.batch_size]
            x, y = x_all[batch], y_all[batch]
            for layer in head:
                layer.zero_grads()
            # frozen embedder runs in inference mode so its buffers stay intact
            emb, ecache = emb_model.forward_batch(x, training=train_embedder)
            logits, hcache = model.head_forward(emb, training=True, rng=rng,
                                                dropout=cfg.dropout_rate)
            _, xent_cache = cross_entropy_fwd(logits, y)
            dlogits = cross_entropy_bwd(xent_cache)
            demb = model.head_backward(dlogits, hcache)
            adam_step(head_params, head_grads, head_state)
            if train_embedder:
                emb_model.zero_grads()
                emb_model.backward_batch(demb, ecache)
                adam_step(emb_params, emb_grads, emb_state)
        if progress is not None:
            progress(epoch)
    return model


def predict(model: GestureModel, hands: Sequence[FrameLandmarks]) -> list[tuple[str, float]]:
    """Ranked (label, probability) over the N+1 classes, descending."""
    emb = embed_frame(model.embedder, hands, model.norm_cfg)
    logits, _ = model.head_forward(emb[None, :], training=False)
    probs = softmax(logits)[0]
    order = np.argsort(-probs, kind="stable")
    return [(model.label_map[int(i)], float(probs[i])) for i in order]
