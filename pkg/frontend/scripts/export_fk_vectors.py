#!/usr/bin/env python3
"""Regenerate tests/fixtures/fk_vectors.json from the server-side kinematics.

Run from the frontend/ directory:  python scripts/export_fk_vectors.py
"""

import json
from pathlib import Path

import numpy as np

from gestureforge.landmarks import Handedness
from gestureforge.synth import (
    CANONICAL_BONES,
    _SPLAY,
    _THUMB_REST_ELEVATION,
    GenSpec,
    HandPoseSpec,
    pose_by_name,
    render_pose,
)

CASE_POSES = ["fist", "open_palm", "victory", "thumbs_up", "c", "bg_claw"]


def case_from(pose: HandPoseSpec, handedness: Handedness, center, scale) -> dict:
    frame = render_pose(pose, handedness, GenSpec(seed=0, noise_sigma=0.0),
                        center=center, scale=scale)
    return {
        "name": pose.name,
        "joint_angles": list(pose.joint_angles),
        "thumb_abduction": pose.thumb_abduction,
        "thumb_rotation": pose.thumb_rotation,
        "global_rotation": list(pose.global_rotation),
        "handedness": handedness.value,
        "center": list(center),
        "scale": scale,
        "points": frame.points.tolist(),
    }


def main():
    rng = np.random.default_rng(7)
    cases = []
    for name in CASE_POSES:
        pose = pose_by_name(name)
        cases.append(case_from(pose, Handedness.RIGHT, (0.5, 0.5), 0.35))
        cases.append(case_from(pose, Handedness.LEFT, (0.45, 0.55), 0.3))
    for i in range(6):
        pose = HandPoseSpec(
            name=f"random{i}",
            joint_angles=tuple(rng.uniform(0.0, 1.9, size=15)),
            thumb_abduction=float(rng.uniform(-0.8, 0.8)),
            thumb_rotation=float(rng.uniform(-0.8, 0.8)),
            global_rotation=tuple(rng.uniform(-0.5, 0.5, size=3)),
        )
        hand = Handedness.RIGHT if i % 2 == 0 else Handedness.LEFT
        cases.append(case_from(pose, hand, (float(rng.uniform(0.3, 0.7)),
                                            float(rng.uniform(0.3, 0.7))),
                               float(rng.uniform(0.25, 0.45))))
    out = {
        "bones": CANONICAL_BONES.tolist(),
        "splay": _SPLAY.tolist(),
        "thumb_rest_elevation": _THUMB_REST_ELEVATION,
        "cases": cases,
    }
    path = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "fk_vectors.json"
    path.write_text(json.dumps(out, indent=1))
    print(f"wrote {len(cases)} cases to {path}")


if __name__ == "__main__":
    main()
