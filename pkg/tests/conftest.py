import numpy as np
import pytest

from gestureforge.landmarks import FrameLandmarks, Handedness


def random_frame(rng: np.random.Generator, handedness: Handedness = Handedness.RIGHT,
                 timestamp_ms: int = 0) -> FrameLandmarks:
    """A valid random frame with a comfortably non-degenerate hand scale."""
    pts = rng.uniform(0.1, 0.9, size=(21, 3))
    # ensure wrist -> middle-MCP distance is well above epsilon
    pts[9] = pts[0] + rng.uniform(0.2, 0.5, size=3)
    return FrameLandmarks(points=pts, handedness=handedness,
                          location=(0.5, 0.5, 0.3), timestamp_ms=timestamp_ms)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
