"""gestureforge: custom hand-gesture recognition from skeletal landmarks.

Pipeline: pretrain a single-hand embedding on synthetic fingerspelling with
CTC loss, transfer it to a small K-shot gesture classifier, evaluate with
specificity/sensitivity SS-F1, and serve live classification over HTTP/WebSocket.
"""

__version__ = "0.1.0"

from .landmarks import (
    FrameLandmarks,
    Handedness,
    LandmarkSequence,
    NormalizationConfig,
    mnae,
    normalize_landmarks,
    read_sequences,
    write_sequences,
)

__all__ = [
    "__version__",
    "FrameLandmarks",
    "Handedness",
    "LandmarkSequence",
    "NormalizationConfig",
    "normalize_landmarks",
    "mnae",
    "read_sequences",
    "write_sequences",
]
