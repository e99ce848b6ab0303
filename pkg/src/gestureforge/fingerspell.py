"""Fingerspelling pretraining: per-frame embeddings + hand location through a
bidirectional LSTM into character logits, trained with CTC loss.

The trained embedding sub-model is exported for transfer to gesture training.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .embedder import EmbeddingConfig, EmbeddingModel, clone_weights, hand_features
from .errors import InvalidArgument, NoHands, ShapeMismatch
from .landmarks import LandmarkSequence, NormalizationConfig
from .nn import (
    AffineParams,
    LstmParams,
    adam_step,
    AdamState,
    affine_bwd,
    affine_fwd,
    bilstm_bwd,
    bilstm_fwd,
    log_softmax,
)
from .synth import letter_poses

log = logging.getLogger(__name__)

BLANK = 0


def toy_alphabet() -> list[str]:
    """Characters of the toy alphabet, in id order (id = position + 1)."""
    return sorted(p.name for p in letter_poses())


def char_to_id() -> dict[str, int]:
    return {ch: i + 1 for i, ch in enumerate(toy_alphabet())}


@dataclass(frozen=True)
class CtcTarget:
    char_ids: tuple[int, ...]

    def __post_init__(self):
        ids = tuple(int(c) for c in self.char_ids)
        if any(c < 1 for c in ids):
            raise InvalidArgument("targets must not contain the blank id (0)")
        object.__setattr__(self, "char_ids", ids)

    @classmethod
    def from_word(cls, word: str) -> "CtcTarget":
        mapping = char_to_id()
        try:
            return cls(tuple(mapping[ch] for ch in word))
        except KeyError as exc:
            raise InvalidArgument(f"character {exc.args[0]!r} not in the toy alphabet") from exc


@dataclass
class FingerspellModel:
    embedder: EmbeddingModel
    lstm_fw: LstmParams
    lstm_bw: LstmParams
    char_proj: AffineParams  # (2H, alphabet+1), index 0 = blank

    @property
    def alphabet_size(self) -> int:
        return self.char_proj.w.shape[1] - 1

    @classmethod
    def create(cls, hidden: int = 64, alphabet_size: int | None = None,
               embed_config: EmbeddingConfig | None = None, seed: int = 0) -> "FingerspellModel":
        alphabet_size = alphabet_size or len(toy_alphabet())
        rng = np.random.default_rng([seed, 0x6C73746D])
        embedder = EmbeddingModel.create(embed_config, seed=seed)
        feat_dim = embedder.config.embedding_dim + 3
        return cls(
            embedder=embedder,
            lstm_fw=LstmParams.create(feat_dim, hidden, rng),
            lstm_bw=LstmParams.create(feat_dim, hidden, rng),
            char_proj=AffineParams.create(2 * hidden, alphabet_size + 1, rng),
        )

    def param_layers(self) -> list:
        return [*self.embedder.param_layers(), self.lstm_fw, self.lstm_bw, self.char_proj]

    def zero_grads(self):
        for layer in self.param_layers():
            layer.zero_grads()


def frame_features(model: FingerspellModel, seq: LandmarkSequence,
                   cfg: NormalizationConfig | None = None) -> np.ndarray:
    """(T, 131) matrix: per-frame embedding concatenated with (wx, wy, scale)."""
    if not seq.frames:
        raise NoHands("sequence has no frames")
    feats, _ = _forward_features(model, seq, cfg, training=False)
    return feats


def _forward_features(model: FingerspellModel, seq: LandmarkSequence,
                      cfg: NormalizationConfig | None, training: bool):
    x = np.stack([hand_features(f, cfg) for f in seq.frames])
    emb, ecache = model.embedder.forward_batch(x, training)
    loc = np.array([f.location for f in seq.frames], dtype=np.float64)
    return np.concatenate([emb, loc], axis=1), ecache


def expanded_target(target: CtcTarget) -> np.ndarray:
    """Blank-interleaved label sequence: blank, c1, blank, ..., cL, blank."""
    ext = np.zeros(2 * len(target.char_ids) + 1, dtype=np.int64)
    ext[1::2] = target.char_ids
    return ext


def ctc_feasible(t_steps: int, target: CtcTarget) -> bool:
    """A target fits iff T >= |target| + number of adjacent repeats."""
    ids = target.char_ids
    repeats = sum(1 for a, b in zip(ids, ids[1:]) if a == b)
    return t_steps >= len(ids) + repeats


def ctc_loss(log_probs: np.ndarray, target: CtcTarget):
    """Negative log-probability of all alignments collapsing to the target.

    log_probs is the (T, A+1) per-step log-softmax; the returned gradient is
    w.r.t. the logits behind it. An infeasible target is reported as the
    distinct condition (+inf, zero gradient) rather than an exception.
    """
    if log_probs.ndim != 2:
        raise ShapeMismatch(f"log_probs must be (T, A+1), got {log_probs.shape}")
    t_steps, num_sym = log_probs.shape
    if t_steps < 1:
        raise ShapeMismatch("need at least one time step")
    if any(c >= num_sym for c in target.char_ids):
        raise InvalidArgument(f"target id out of range for alphabet size {num_sym - 1}")
    if not ctc_feasible(t_steps, target):
        return math.inf, np.zeros_like(log_probs)
    loss, grad = kernels.ctc_forward_backward(
        np.ascontiguousarray(log_probs, dtype=np.float64), expanded_target(target))
    return loss, grad


def greedy_decode(log_probs: np.ndarray) -> list[int]:
    """Per-step argmax (ties break to the lowest index), collapse repeats,
    strip blanks."""
    best = np.argmax(log_probs, axis=1)
    out: list[int] = []
    prev = -1
    for k in best:
        if k != prev and k != BLANK:
            out.append(int(k))
        prev = k
    return out


def levenshtein(a, b) -> int:
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


@dataclass(frozen=True)
class PretrainConfig:
    lr: float = 1e-3
    batch_size: int = 8
    epochs: int = 15
    hidden: int = 64
    seed: int = 0

    def __post_init__(self):
        if self.lr <= 0 or self.batch_size < 1 or self.epochs < 0 or self.hidden < 1:
            raise InvalidArgument("invalid pretraining hyperparameters")


@dataclass
class EpochStats:
    epoch: int
    mean_loss: float
    label_error_rate: float
    skipped_infeasible: int = 0


def _forward_seq(model: FingerspellModel, seq: LandmarkSequence,
                 cfg: NormalizationConfig | None, training: bool):
    feats, ecache = _forward_features(model, seq, cfg, training)
    hh, bcache = bilstm_fwd(feats, model.lstm_fw, model.lstm_bw)
    logits, pcache = affine_fwd(hh, model.char_proj)
    return log_softmax(logits), (ecache, bcache, pcache)


def _backward_seq(model: FingerspellModel, dlogits: np.ndarray, cache):
    ecache, bcache, pcache = cache
    dh = affine_bwd(dlogits, pcache, model.char_proj)
    dfeats = bilstm_bwd(dh, bcache, model.lstm_fw, model.lstm_bw)
    model.embedder.backward_batch(dfeats[:, :model.embedder.config.embedding_dim], ecache)


def pretrain(dataset: list[LandmarkSequence], hyper: PretrainConfig | None = None,
             cfg: NormalizationConfig | None = None,
             progress=None) -> tuple[FingerspellModel, list[EpochStats]]:
    """Train a fingerspelling model on word-labeled sequences.

    Deterministic given hyper.seed. Sequences whose target cannot fit in their
    frame count are skipped and counted per epoch.
    """
    if not dataset:
        raise InvalidArgument("dataset must be non-empty")
    hyper = hyper or PretrainConfig()
    targets = []
    for seq in dataset:
        if not seq.label:
            raise InvalidArgument("every pretraining sequence needs a word label")
        targets.append(CtcTarget.from_word(seq.label))
    feasible = [ctc_feasible(len(seq.frames), tgt) for seq, tgt in zip(dataset, targets)]

    model = FingerspellModel.create(hidden=hyper.hidden, seed=hyper.seed)
    rng = np.random.default_rng([hyper.seed, 0x70726574])
    layers = model.param_layers()
    params = [p for layer in layers for p in layer.params()]
    grads = [g for layer in layers for g in layer.grads()]
    state = AdamState.create(params, lr=hyper.lr)

    history: list[EpochStats] = []
    for epoch in range(hyper.epochs):
        order = rng.permutation(len(dataset))
        losses: list[float] = []
        cer_num = 0
        cer_den = 0
        skipped = 0
        for start in range(0, len(order), hyper.batch_size):
            batch = order[start:start + hyper.batch_size]
            model.zero_grads()
            used = 0
            for idx in batch:
                if not feasible[idx]:
                    skipped += 1
                    continue
                seq, target = dataset[idx], targets[idx]
                lp, cache = _forward_seq(model, seq, cfg, training=True)
                loss, dlogits = ctc_loss(lp, target)
                if math.isinf(loss):
                    skipped += 1
                    continue
                losses.append(loss)
                decoded = greedy_decode(lp)
                cer_num += levenshtein(decoded, list(target.char_ids))
                cer_den += len(target.char_ids)
                _backward_seq(model, dlogits, cache)
                used += 1
            if used == 0:
                continue
            for g in grads:
                g /= used
            adam_step(params, grads, state)
        stats = EpochStats(
            epoch=epoch,
            mean_loss=float(np.mean(losses)) if losses else math.inf,
            label_error_rate=cer_num / cer_den if cer_den else 1.0,
            skipped_infeasible=skipped,
        )
        if skipped:
            log.warning("epoch %d: skipped %d sequences with infeasible targets", epoch, skipped)
        history.append(stats)
        if progress is not None:
            progress(stats)
    return model, history


def decode_sequence(model: FingerspellModel, seq: LandmarkSequence,
                    cfg: NormalizationConfig | None = None) -> str:
    """Greedy-decoded characters for one sequence."""
    lp, _ = _forward_seq(model, seq, cfg, training=False)
    alphabet = toy_alphabet()
    return "".join(alphabet[k - 1] for k in greedy_decode(lp))


def character_error_rate(model: FingerspellModel, dataset: list[LandmarkSequence],
                         cfg: NormalizationConfig | None = None) -> float:
    """Mean Levenshtein distance / target length over labeled sequences."""
    num = 0
    den = 0
    for seq in dataset:
        target = CtcTarget.from_word(seq.label)
        lp, _ = _forward_seq(model, seq, cfg, training=False)
        num += levenshtein(greedy_decode(lp), list(target.char_ids))
        den += len(target.char_ids)
    return num / den if den else 0.0


def export_embedder(model: FingerspellModel) -> EmbeddingModel:
    """Deep copy of the embedding sub-model, insulated from further training."""
    return clone_weights(model.embedder)
