"""Canonical hand-landmark representation, normalization, file I/O and MNAE.

A hand is 21 skeletal keypoints (wrist = index 0, middle-finger MCP = index 9,
following the usual hand-landmark indexing) plus handedness and an
image-space location triple (wrist_x, wrist_y, hand_scale).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateHand, InvalidArgument, IoError, LengthMismatch, ParseError

WRIST = 0
MIDDLE_MCP = 9
NUM_POINTS = 21


class Handedness(Enum):
    LEFT = "left"
    RIGHT = "right"

    @classmethod
    def parse(cls, text: str) -> "Handedness":
        try:
            return cls(text.lower())
        except ValueError:
            raise InvalidArgument(f"handedness must be 'left' or 'right', got {text!r}")


class ScaleReference(Enum):
    WRIST_TO_MIDDLE_MCP = "wrist_to_middle_mcp"


@dataclass(frozen=True)
class NormalizationConfig:
    scale_reference: ScaleReference = ScaleReference.WRIST_TO_MIDDLE_MCP
    keep_rotation: bool = True
    epsilon: float = 1e-6

    def __post_init__(self):
        if self.epsilon <= 0:
            raise InvalidArgument("epsilon must be > 0")


@dataclass(frozen=True)
class FrameLandmarks:
    """One detected hand in one frame.

    points: (21, 3) array, x/y in image-normalized units, z relative depth.
    location: (wrist_x, wrist_y, hand_scale) in image-normalized units.
    """

    points: np.ndarray
    handedness: Handedness
    location: tuple[float, float, float]
    timestamp_ms: int = 0

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.shape != (NUM_POINTS, 3):
            raise InvalidArgument(f"expected {NUM_POINTS} points of (x,y,z), got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise InvalidArgument("landmark coordinates must be finite")
        loc = tuple(float(v) for v in self.location)
        if len(loc) != 3 or not all(math.isfinite(v) for v in loc):
            raise InvalidArgument("location must be three finite values (wrist_x, wrist_y, hand_scale)")
        if loc[2] <= 0:
            raise InvalidArgument("hand_scale must be > 0")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "location", loc)
        object.__setattr__(self, "timestamp_ms", int(self.timestamp_ms))


@dataclass
class LandmarkSequence:
    """Ordered hand frames with an optional label (gesture name or word)."""

    frames: list[FrameLandmarks]
    label: str | None = None

    def __post_init__(self):
        if not self.frames:
            raise InvalidArgument("sequence must contain at least one frame")
        ts = [f.timestamp_ms for f in self.frames]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise InvalidArgument("frame timestamps must be strictly increasing")


def normalize_landmarks(frame: FrameLandmarks, cfg: NormalizationConfig | None = None) -> np.ndarray:
    """Translate the wrist to the origin and scale wrist->middle-MCP to 1.

    Rotation is kept (orientation is gesture-discriminative). Returns the 21
    normalized points flattened in index order as a 63-vector.
    """
    cfg = cfg or NormalizationConfig()
    pts = frame.points
    wrist = pts[WRIST]
    ref = np.linalg.norm(pts[MIDDLE_MCP] - wrist)
    if ref < cfg.epsilon:
        raise DegenerateHand(f"wrist-to-reference distance {ref:.3e} below epsilon {cfg.epsilon:.3e}")
    out = (pts - wrist) / ref
    out[WRIST] = 0.0  # exact zero regardless of rounding
    return out.reshape(-1)


def mnae(predicted: Sequence[FrameLandmarks], truth: Sequence[FrameLandmarks]) -> float:
    """Mean normalized absolute error between paired landmark frames, in percent.

    Per frame, each landmark's Euclidean error is divided by the ground-truth
    hand scale (wrist to middle-MCP distance); the result is 100 x the mean
    over all frames and landmarks.
    """
    if len(predicted) != len(truth):
        raise LengthMismatch(f"{len(predicted)} predicted frames vs {len(truth)} truth frames")
    if not truth:
        raise LengthMismatch("need at least one frame pair")
    total = 0.0
    for pred, true in zip(predicted, truth):
        scale = np.linalg.norm(true.points[MIDDLE_MCP] - true.points[WRIST])
        if scale < 1e-12:
            raise DegenerateHand("truth frame has zero hand scale")
        err = np.linalg.norm(pred.points - true.points, axis=1)
        total += float(np.sum(err / scale))
    return 100.0 * total / (len(truth) * NUM_POINTS)


# ---------------------------------------------------------------------------
# Line-delimited sequence files (.lmk.jsonl)
#
# One JSON object per line:
#   {"label": <str|null>, "frames": [{"t_ms": int, "handedness": "left"|"right",
#    "loc": [wx, wy, s], "pts": [[x, y, z] x 21]}, ...]}
# Coordinates are written as decimals with 9 significant digits; re-reading a
# written file reproduces the written values bit-exactly.
# ---------------------------------------------------------------------------

def _q(v: float) -> float:
    """Quantize a coordinate to 9 significant decimal digits."""
    return float(f"{float(v):.9g}")


def frame_to_record(frame: FrameLandmarks) -> dict:
    return {
        "t_ms": frame.timestamp_ms,
        "handedness": frame.handedness.value,
        "loc": [_q(v) for v in frame.location],
        "pts": [[_q(v) for v in p] for p in frame.points],
    }


def frame_from_record(rec: dict, *, line: int = 0, frame_idx: int = 0) -> FrameLandmarks:
    where = f"frame {frame_idx}"
    if not isinstance(rec, dict):
        raise ParseError(f"{where}: expected an object", line)
    for key in ("t_ms", "handedness", "loc", "pts"):
        if key not in rec:
            raise ParseError(f"{where}: missing field {key!r}", line)
    pts = rec["pts"]
    if not isinstance(pts, list) or len(pts) != NUM_POINTS:
        got = len(pts) if isinstance(pts, list) else type(pts).__name__
        raise ParseError(f"{where}: expected {NUM_POINTS} points, got {got}", line)
    try:
        return FrameLandmarks(
            points=np.array(pts, dtype=np.float64),
            handedness=Handedness.parse(rec["handedness"]),
            location=tuple(rec["loc"]),
            timestamp_ms=rec["t_ms"],
        )
    except (InvalidArgument, TypeError, ValueError) as exc:
        raise ParseError(f"{where}: {exc}", line) from exc


def write_sequences(path, seqs: Iterable[LandmarkSequence]) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            for seq in seqs:
                record = {"label": seq.label, "frames": [frame_to_record(f) for f in seq.frames]}
                fh.write(json.dumps(record, separators=(",", ":")) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def read_sequences(path) -> list[LandmarkSequence]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    out: list[LandmarkSequence] = []
    for lineno, raw in enumerate(lines, start=1):
        raw = raw.strip()
        if not raw:
            continue
        out.append(parse_sequence_record(raw, line=lineno))
    return out


def parse_sequence_record(raw: str | dict, *, line: int = 0) -> LandmarkSequence:
    """Parse one line-record (JSON text or already-decoded object)."""
    if isinstance(raw, str):
        try:
            rec = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", line) from exc
    else:
        rec = raw
    if not isinstance(rec, dict) or "frames" not in rec:
        raise ParseError("record must be an object with a 'frames' field", line)
    label = rec.get("label")
    if label is not None and not isinstance(label, str):
        raise ParseError("label must be a string or null", line)
    frames = [
        frame_from_record(fr, line=line, frame_idx=i)
        for i, fr in enumerate(rec["frames"])
    ]
    try:
        return LandmarkSequence(frames=frames, label=label)
    except InvalidArgument as exc:
        raise ParseError(str(exc), line) from exc
