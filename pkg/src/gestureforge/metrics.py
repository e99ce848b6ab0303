"""Evaluation: confusion matrix, specificity/sensitivity, SS-F1, and the
K-shot x regime x seed ablation sweep."""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .embedder import EmbeddingModel
from .errors import InsufficientData, InvalidArgument, LabelMismatch
from .gesture import (
    BACKGROUND,
    GestureHeadConfig,
    GestureModel,
    Regime,
    Sample,
    TrainSpec,
    kshot_sample,
    predict,
    train,
)

log = logging.getLogger(__name__)

DEFAULT_KS = (10, 20, 50, 100, 200, 500)


@dataclass
class ConfusionMatrix:
    """Counts indexed [truth, prediction]; class 0 is background."""

    counts: np.ndarray
    labels: list[str]

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        n = len(self.labels)
        if counts.shape != (n, n):
            raise InvalidArgument(f"counts shape {counts.shape} vs {n} labels")
        if (counts < 0).any():
            raise InvalidArgument("counts must be non-negative")
        self.counts = counts

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def specificity(cm: ConfusionMatrix) -> tuple[float, bool]:
    """TN/(TN+FP) over background samples; (value, flagged) where flagged
    marks the zero-denominator convention (1.0)."""
    tn = int(cm.counts[0, 0])
    fp = int(cm.counts[0, 1:].sum())
    if tn + fp == 0:
        return 1.0, True
    return tn / (tn + fp), False


def sensitivity(cm: ConfusionMatrix) -> tuple[float, bool]:
    """TP/(TP+FN) over gesture samples, pooled across classes; TP requires the
    sample's own gesture class."""
    tp = int(np.trace(cm.counts)) - int(cm.counts[0, 0])
    total_gesture = int(cm.counts[1:, :].sum())
    fn = total_gesture - tp
    if tp + fn == 0:
        return 1.0, True
    return tp / (tp + fn), False


def ss_f1(sens: float, spec: float) -> float:
    """Harmonic mean of sensitivity and specificity; 0 when both are 0."""
    if not (0.0 <= sens <= 1.0 and 0.0 <= spec <= 1.0):
        raise InvalidArgument("inputs must lie in [0, 1]")
    if sens + spec == 0.0:
        return 0.0
    return 2.0 * sens * spec / (sens + spec)


@dataclass
class EvalReport:
    confusion: ConfusionMatrix
    sensitivity: float
    specificity: float
    ss_f1: float
    complementary_ss_f1: float
    regime: Regime | None = None
    k: int | None = None
    seed: int | None = None
    flags: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "labels": self.confusion.labels,
            "confusion": self.confusion.counts.tolist(),
            "sensitivity": self.sensitivity,
            "specificity": self.specificity,
            "ss_f1": self.ss_f1,
            "complementary_ss_f1": self.complementary_ss_f1,
            "regime": self.regime.value if self.regime else None,
            "k": self.k,
            "seed": self.seed,
            "flags": self.flags,
        }


def report_from_confusion(cm: ConfusionMatrix, regime: Regime | None = None,
                          k: int | None = None, seed: int | None = None) -> EvalReport:
    sens, sens_flag = sensitivity(cm)
    spec, spec_flag = specificity(cm)
    f1 = ss_f1(sens, spec)
    # round-trip through the complement (<= 1 ulp) so that both
    # comp == 1 - f1 and comp + f1 == 1 hold exactly in floating point
    comp = 1.0 - f1
    f1 = 1.0 - comp
    flags = []
    if sens_flag:
        flags.append("no_gesture_samples")
    if spec_flag:
        flags.append("no_background_samples")
    return EvalReport(confusion=cm, sensitivity=sens, specificity=spec,
                      ss_f1=f1, complementary_ss_f1=comp,
                      regime=regime, k=k, seed=seed, flags=flags)


def evaluate(model: GestureModel, split: Sequence[Sample], regime: Regime | None = None,
             k: int | None = None, seed: int | None = None) -> EvalReport:
    """Argmax-classify every sample and report the pooled metrics."""
    if not split:
        raise InvalidArgument("eval split must be non-empty")
    name_to_idx = {name: i for i, name in model.label_map.items()}
    n = len(model.label_map)
    counts = np.zeros((n, n), dtype=np.int64)
    for frame, label in split:
        if label not in name_to_idx:
            raise LabelMismatch(f"label {label!r} not in the model's label map")
        top_label = predict(model, [frame])[0][0]
        counts[name_to_idx[label], name_to_idx[top_label]] += 1
    labels = [model.label_map[i] for i in range(n)]
    return report_from_confusion(ConfusionMatrix(counts, labels), regime, k, seed)


@dataclass
class AblationCell:
    k: int
    regime: Regime
    seed: int
    report: EvalReport | None
    error: str | None = None


@dataclass
class SummaryRow:
    k: int
    regime: Regime
    mean_comp_ssf1: float
    stddev: float
    n_seeds: int


def run_ablation(dataset: Sequence[Sample], embedder: EmbeddingModel,
                 ks: Sequence[int] = DEFAULT_KS,
                 regimes: Sequence[Regime] = (Regime.FINE_TUNED, Regime.FROZEN, Regime.RANDOM_INIT),
                 seeds: Sequence[int] = (0, 1, 2, 3, 4),
                 head_cfg: GestureHeadConfig | None = None,
                 train_overrides: dict | None = None,
                 progress=None) -> tuple[list[AblationCell], list[SummaryRow]]:
    """One K-shot train+eval per (K, regime, seed); failing cells are recorded,
    not fatal. Returns all cells plus per-(K, regime) means of the
    complementary SS-F1."""
    gestures = sorted({label for _, label in dataset} - {BACKGROUND})
    head_cfg = head_cfg or GestureHeadConfig(num_gestures=len(gestures))
    overrides = train_overrides or {}
    cells: list[AblationCell] = []
    for k in ks:
        for regime in regimes:
            for seed in seeds:
                try:
                    train_split, eval_split = kshot_sample(dataset, k, seed)
                    spec = TrainSpec(regime=regime, k=k, seed=seed, **overrides)
                    model = train(embedder, train_split, head_cfg, spec)
                    report = evaluate(model, eval_split, regime=regime, k=k, seed=seed)
                    cells.append(AblationCell(k=k, regime=regime, seed=seed, report=report))
                except InsufficientData as exc:
                    log.warning("cell (K=%d, %s, seed=%d) skipped: %s", k, regime.value, seed, exc)
                    cells.append(AblationCell(k=k, regime=regime, seed=seed,
                                              report=None, error=str(exc)))
                if progress is not None:
                    progress(cells[-1])
    summary: list[SummaryRow] = []
    for k in ks:
        for regime in regimes:
            vals = [c.report.complementary_ss_f1 for c in cells
                    if c.k == k and c.regime == regime and c.report is not None]
            if not vals:
                continue
            summary.append(SummaryRow(
                k=k, regime=regime,
                mean_comp_ssf1=float(np.mean(vals)),
                stddev=float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0,
                n_seeds=len(vals),
            ))
    return cells, summary


def write_reports_jsonl(path, cells: list[AblationCell]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for cell in cells:
            if cell.report is not None:
                rec = cell.report.to_dict()
            else:
                rec = {"k": cell.k, "regime": cell.regime.value, "seed": cell.seed,
                       "error": cell.error}
            fh.write(json.dumps(rec, separators=(",", ":")) + "\n")


def write_summary_csv(path, summary: list[SummaryRow]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["K", "regime", "mean_comp_ssf1", "stddev", "n_seeds"])
        for row in summary:
            writer.writerow([row.k, row.regime.value,
                             f"{row.mean_comp_ssf1:.6f}", f"{row.stddev:.6f}", row.n_seeds])
