"""Shared K-shot training workflow used by the CLI, the ablation runner and
the service's training jobs, so models trained through any surface from equal
inputs are bit-identical."""

from __future__ import annotations

import hashlib
import json

from .embedder import EmbeddingModel
from .errors import InsufficientData, InvalidArgument
from .gesture import (
    BACKGROUND,
    GestureHeadConfig,
    GestureModel,
    Sample,
    TrainSpec,
    kshot_sample,
    train,
)
from .landmarks import LandmarkSequence, frame_to_record
from .metrics import EvalReport, evaluate


def samples_from_sequences(seqs: list[LandmarkSequence]) -> list[Sample]:
    """Flatten labeled sequences into per-frame samples."""
    samples: list[Sample] = []
    for seq in seqs:
        if not seq.label:
            raise InvalidArgument("gesture dataset sequences must carry a class label")
        samples.extend((frame, seq.label) for frame in seq.frames)
    return samples


def dataset_digest(samples: list[Sample]) -> str:
    """Canonical content digest over (frame record, label) pairs."""
    h = hashlib.sha256()
    for frame, label in samples:
        line = json.dumps({"label": label, "frame": frame_to_record(frame)},
                          separators=(",", ":"), sort_keys=True)
        h.update(line.encode("utf-8"))
        h.update(b"\n")
    return h.hexdigest()


def training_metadata(spec: TrainSpec, data_digest: str, train_size: int) -> dict:
    """Deterministic metadata embedded in model files (no wall clock, no ids)."""
    return {
        "regime": spec.regime.value,
        "k": spec.k,
        "seed": spec.seed,
        "lr_head": spec.lr_head,
        "lr_embedder": spec.lr_embedder,
        "batch_size": spec.batch_size,
        "epochs": spec.epochs,
        "data_digest": data_digest,
        "train_size": train_size,
    }


def default_embedder() -> EmbeddingModel:
    """Untrained stand-in used when no pretrained embedder is supplied."""
    return EmbeddingModel.create(seed=0)


def run_kshot_training(
    samples: list[Sample],
    embedder: EmbeddingModel,
    spec: TrainSpec,
    expected_classes: list[str] | None = None,
    head_hidden: tuple[int, ...] = (64,),
    dropout: float = 0.2,
    progress=None,
) -> tuple[GestureModel, EvalReport | None, dict]:
    """K-shot split, train, evaluate on the remainder.

    Returns (model, report-or-None-if-no-remainder, metadata dict).
    """
    present = {label for _, label in samples}
    if expected_classes is not None:
        for name in expected_classes:
            if name != BACKGROUND and name not in present:
                raise InsufficientData(f"class {name!r} has 0 samples, need {spec.k}")
    gestures = sorted(present - {BACKGROUND})
    if not gestures:
        raise InsufficientData("no gesture classes present in the data")
    if BACKGROUND not in present:
        raise InsufficientData(f"class '{BACKGROUND}' has 0 samples, need {spec.k}")
    train_split, eval_split = kshot_sample(samples, spec.k, spec.seed)
    cfg = GestureHeadConfig(num_gestures=len(gestures), hidden_dims=head_hidden,
                            dropout_rate=dropout)
    model = train(embedder, train_split, cfg, spec, progress=progress)
    report = None
    if eval_split:
        report = evaluate(model, eval_split, regime=spec.regime, k=spec.k, seed=spec.seed)
    metadata = training_metadata(spec, dataset_digest(samples), len(train_split))
    return model, report, metadata
