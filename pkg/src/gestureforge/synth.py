"""Procedural hand-kinematics generator.

Produces labeled landmark frames and fingerspelling sequences from a canonical
21-point skeleton: wrist plus five 4-bone finger chains
(thumb 1-4, index 5-8, middle 9-12, ring 13-16, pinky 17-20).
Each finger has a fixed base bone (wrist to MCP/CMC, part of the palm) and
three flexed bones; the thumb additionally has abduction and elevation angles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidArgument, InvalidPose, UnknownCharacter, UnknownPose
from .landmarks import FrameLandmarks, Handedness, LandmarkSequence

FLEXION_MAX = 1.9
THUMB_EXTRA_MAX = 1.6

# Canonical bone lengths, chain order thumb..pinky, 4 bones per chain
# (base bone first). Middle chain sums to 1 so normalization is near-identity.
CANONICAL_BONES = np.array(
    [
        0.25, 0.20, 0.16, 0.13,   # thumb
        0.43, 0.22, 0.15, 0.12,   # index
        0.45, 0.25, 0.17, 0.13,   # middle
        0.42, 0.22, 0.15, 0.12,   # ring
        0.38, 0.16, 0.11, 0.10,   # pinky
    ]
)

# Splay of each finger's base direction in the palm plane, radians from +y
# (positive toward the thumb side of a right hand).
_SPLAY = np.array([0.95, 0.26, 0.0, -0.21, -0.44])

# Default out-of-plane elevation of the thumb chain (toward the palm side).
_THUMB_REST_ELEVATION = -0.45


@dataclass(frozen=True)
class HandPoseSpec:
    """A static hand shape: per-joint flexion plus thumb and global angles.

    joint_angles: 15 flexion angles (3 per finger, base-to-tip order,
    thumb first). thumb_abduction rotates the thumb chain in the palm plane,
    thumb_rotation elevates it out of the plane. global_rotation is XYZ Euler
    angles applied about the wrist.
    """

    name: str
    joint_angles: tuple[float, ...]
    thumb_abduction: float = 0.0
    thumb_rotation: float = 0.0
    global_rotation: tuple[float, float, float] = (0.0, 0.0, 0.0)
    bone_lengths: tuple[float, ...] = tuple(CANONICAL_BONES)

    def __post_init__(self):
        angles = tuple(float(a) for a in self.joint_angles)
        if len(angles) != 15:
            raise InvalidPose(f"{self.name}: expected 15 flexion angles, got {len(angles)}")
        if any(a < 0.0 or a > FLEXION_MAX for a in angles):
            raise InvalidPose(f"{self.name}: flexion angles must lie in [0, {FLEXION_MAX}] rad")
        for label, v in (("thumb_abduction", self.thumb_abduction), ("thumb_rotation", self.thumb_rotation)):
            if abs(v) > THUMB_EXTRA_MAX:
                raise InvalidPose(f"{self.name}: {label} must lie in [-{THUMB_EXTRA_MAX}, {THUMB_EXTRA_MAX}]")
        bones = tuple(float(b) for b in self.bone_lengths)
        if len(bones) != 20 or any(b <= 0 for b in bones):
            raise InvalidPose(f"{self.name}: need 20 positive bone lengths")
        object.__setattr__(self, "joint_angles", angles)
        object.__setattr__(self, "bone_lengths", bones)
        object.__setattr__(self, "global_rotation", tuple(float(a) for a in self.global_rotation))


@dataclass(frozen=True)
class GenSpec:
    """Generation parameters: RNG seed, jitter, frame pacing."""

    seed: int = 0
    noise_sigma: float = 0.0
    fps: int = 8
    transition_frames: int = 3

    def __post_init__(self):
        if self.noise_sigma < 0:
            raise InvalidArgument("noise_sigma must be >= 0")
        if self.fps < 1:
            raise InvalidArgument("fps must be >= 1")
        if self.transition_frames < 1:
            raise InvalidArgument("transition_frames must be >= 1")


def _rotation_matrix(axis: np.ndarray, angle: float) -> np.ndarray:
    """Rodrigues rotation about a unit axis."""
    x, y, z = axis
    c, s = math.cos(angle), math.sin(angle)
    cc = 1.0 - c
    return np.array(
        [
            [c + x * x * cc, x * y * cc - z * s, x * z * cc + y * s],
            [y * x * cc + z * s, c + y * y * cc, y * z * cc - x * s],
            [z * x * cc - y * s, z * y * cc + x * s, c + z * z * cc],
        ]
    )


def _euler_xyz(rx: float, ry: float, rz: float) -> np.ndarray:
    return (
        _rotation_matrix(np.array([0.0, 0.0, 1.0]), rz)
        @ _rotation_matrix(np.array([0.0, 1.0, 0.0]), ry)
        @ _rotation_matrix(np.array([1.0, 0.0, 0.0]), rx)
    )


def _local_skeleton(pose: HandPoseSpec) -> np.ndarray:
    """Forward kinematics in the hand-local frame (right hand, wrist at origin).

    Palm lies in the x-y plane with fingers along +y and the back of the hand
    toward +z; flexion curls fingertips toward -z.
    """
    pts = np.zeros((21, 3))
    bones = np.asarray(pose.bone_lengths)
    z = np.array([0.0, 0.0, 1.0])
    for finger in range(5):
        splay = _SPLAY[finger]
        base_dir = np.array([math.sin(splay), math.cos(splay), 0.0])
        if finger == 0:
            base_dir = _rotation_matrix(z, pose.thumb_abduction) @ base_dir
            elev_axis = np.cross(z, base_dir)
            elev_axis /= np.linalg.norm(elev_axis)
            base_dir = _rotation_matrix(elev_axis, _THUMB_REST_ELEVATION + pose.thumb_rotation) @ base_dir
        # Flexion axis: perpendicular to the base direction, chosen so positive
        # flexion curls toward the palm (-z).
        flex_axis = np.cross(z, base_dir)
        flex_axis /= np.linalg.norm(flex_axis)
        pos = bones[finger * 4] * base_dir
        pts[1 + finger * 4] = pos
        direction = base_dir
        for joint in range(3):
            angle = pose.joint_angles[finger * 3 + joint]
            direction = _rotation_matrix(flex_axis, angle) @ direction
            pos = pos + bones[finger * 4 + 1 + joint] * direction
            pts[2 + finger * 4 + joint] = pos
    return pts


def render_pose(
    pose: HandPoseSpec,
    handedness: Handedness,
    gen: GenSpec,
    frame_index: int = 0,
    *,
    center: tuple[float, float] = (0.5, 0.5),
    scale: float = 0.35,
    timestamp_ms: int | None = None,
) -> FrameLandmarks:
    """Render a pose to image-space landmarks.

    Deterministic given (pose, handedness, gen.seed, frame_index); left hands
    are the x-mirror (about the wrist) of right hands before noise.
    """
    local = _local_skeleton(pose)
    rot = _euler_xyz(*pose.global_rotation)
    local = local @ rot.T
    if handedness is Handedness.LEFT:
        local = local * np.array([-1.0, 1.0, 1.0])
    pts = local * scale
    pts[:, 0] += center[0]
    pts[:, 1] += center[1]
    if gen.noise_sigma > 0:
        rng = np.random.default_rng([gen.seed & 0xFFFFFFFFFFFFFFFF, frame_index & 0xFFFFFFFFFFFFFFFF])
        pts = pts + rng.normal(0.0, gen.noise_sigma, size=pts.shape)
    return FrameLandmarks(
        points=pts,
        handedness=handedness,
        location=(center[0], center[1], scale),
        timestamp_ms=frame_index if timestamp_ms is None else timestamp_ms,
    )


# ---------------------------------------------------------------------------
# Builtin pose set: 12 toy letters, 8 gestures, 4 backgrounds.
# Flexion shorthand: 0 straight, ~0.8 half curl, >=1.4 full curl.
# ---------------------------------------------------------------------------

def _flex(thumb, index, middle, ring, pinky):
    """Uniform per-finger curl expanded to the 15 joint angles."""
    out = []
    for c in (thumb, index, middle, ring, pinky):
        out.extend([c, c * 0.9, c * 0.7])
    return tuple(out)


def _make_builtin() -> list[HandPoseSpec]:
    P = HandPoseSpec
    poses = [
        # --- toy letters (single-character names) ---
        P("a", _flex(0.0, 1.5, 1.5, 1.5, 1.5), thumb_abduction=0.35),
        P("b", _flex(1.1, 0.0, 0.0, 0.0, 0.0), thumb_abduction=-0.5, thumb_rotation=-0.4),
        P("c", _flex(0.5, 0.8, 0.8, 0.8, 0.8)),
        P("d", _flex(0.6, 0.0, 1.4, 1.4, 1.4)),
        P("e", _flex(1.2, 1.7, 1.7, 1.7, 1.7), thumb_rotation=-0.8),
        P("f", _flex(0.7, 1.5, 0.0, 0.0, 0.0)),
        P("g", _flex(0.0, 0.0, 1.5, 1.5, 1.5), thumb_abduction=0.3, global_rotation=(0.0, 0.0, -1.1)),
        P("h", _flex(0.9, 0.7, 0.7, 1.6, 1.6)),
        P("i", _flex(1.0, 1.5, 1.5, 1.5, 0.0)),
        P("j", _flex(1.0, 1.5, 1.5, 1.5, 0.0), global_rotation=(0.0, 0.6, 0.5)),
        P("k", _flex(0.4, 0.0, 0.8, 1.6, 1.6), thumb_abduction=0.2),
        P("l", _flex(0.0, 0.0, 1.5, 1.5, 1.5), thumb_abduction=0.55),
        # --- gesture classes ---
        P("fist", _flex(1.0, 1.5, 1.5, 1.5, 1.5), thumb_rotation=-0.6),
        P("open_palm", _flex(0.0, 0.0, 0.0, 0.0, 0.0), thumb_abduction=0.3),
        P("thumbs_up", _flex(0.0, 1.5, 1.5, 1.5, 1.5), thumb_abduction=0.5,
          global_rotation=(0.0, 0.0, 1.2)),
        P("victory", _flex(1.0, 0.0, 0.0, 1.6, 1.6), thumb_rotation=-0.5),
        P("point", _flex(1.1, 0.0, 1.6, 1.6, 1.6), thumb_rotation=-0.7,
          global_rotation=(-0.9, 0.0, 0.0)),
        P("horns", _flex(1.1, 0.0, 1.6, 1.6, 0.0), thumb_rotation=-0.5),
        P("shaka", _flex(0.0, 1.5, 1.5, 1.5, 0.0), thumb_abduction=0.6, global_rotation=(0.0, 0.0, 0.5)),
        P("ok_ring", _flex(0.55, 0.9, 0.0, 0.0, 0.0), thumb_abduction=-0.2, thumb_rotation=-0.3),
        # --- background poses ---
        P("bg_relaxed", _flex(0.3, 0.35, 0.4, 0.45, 0.4), thumb_rotation=-0.2),
        P("bg_half_curl", _flex(0.6, 1.0, 1.1, 1.1, 1.0)),
        P("bg_sprawl", _flex(0.2, 0.15, 0.5, 0.9, 1.25), thumb_abduction=0.25),
        P("bg_claw", (0.5, 0.4, 0.3, 0.1, 1.1, 1.2, 0.1, 1.1, 1.2, 0.1, 1.1, 1.2, 0.1, 1.1, 1.2),
          global_rotation=(0.35, 0.0, 0.0)),
    ]
    return poses


_BUILTIN = _make_builtin()
_BUILTIN_BY_NAME = {p.name: p for p in _BUILTIN}


def builtin_alphabet() -> list[HandPoseSpec]:
    """All builtin poses: toy letters, gesture classes, background shapes."""
    return list(_BUILTIN)


def letter_poses() -> list[HandPoseSpec]:
    return [p for p in _BUILTIN if len(p.name) == 1]


def gesture_poses() -> list[HandPoseSpec]:
    return [p for p in _BUILTIN if len(p.name) > 1 and not p.name.startswith("bg_")]


def background_poses() -> list[HandPoseSpec]:
    return [p for p in _BUILTIN if p.name.startswith("bg_")]


def pose_by_name(name: str) -> HandPoseSpec:
    try:
        return _BUILTIN_BY_NAME[name]
    except KeyError:
        raise UnknownPose(f"no builtin pose named {name!r}")


def _interpolate(a: HandPoseSpec, b: HandPoseSpec, t: float, name: str) -> HandPoseSpec:
    lerp = lambda u, v: (1.0 - t) * u + t * v
    return HandPoseSpec(
        name=name,
        joint_angles=tuple(lerp(u, v) for u, v in zip(a.joint_angles, b.joint_angles)),
        thumb_abduction=lerp(a.thumb_abduction, b.thumb_abduction),
        thumb_rotation=lerp(a.thumb_rotation, b.thumb_rotation),
        global_rotation=tuple(lerp(u, v) for u, v in zip(a.global_rotation, b.global_rotation)),
        bone_lengths=a.bone_lengths,
    )


def gen_fingerspelling(word: str, handedness: Handedness, gen: GenSpec) -> LandmarkSequence:
    """Landmark sequence of a word: hold frames per character plus linear
    joint-angle transitions between consecutive characters."""
    if not word:
        raise UnknownCharacter("word must be non-empty")
    letters = {p.name for p in letter_poses()}
    for ch in word:
        if ch not in letters:
            raise UnknownCharacter(f"character {ch!r} not in the toy alphabet")
    hold = max(1, gen.fps // 2)
    poses: list[HandPoseSpec] = []
    for i, ch in enumerate(word):
        cur = pose_by_name(ch)
        poses.extend([cur] * hold)
        if i + 1 < len(word):
            nxt = pose_by_name(word[i + 1])
            for k in range(1, gen.transition_frames + 1):
                t = k / (gen.transition_frames + 1)
                poses.append(_interpolate(cur, nxt, t, name=f"{ch}->{word[i + 1]}"))
    step_ms = max(1, round(1000 / gen.fps))
    frames = [
        render_pose(p, handedness, gen, frame_index=i, timestamp_ms=i * step_ms)
        for i, p in enumerate(poses)
    ]
    return LandmarkSequence(frames=frames, label=word)


def _jittered(pose: HandPoseSpec, rng: np.random.Generator) -> tuple[HandPoseSpec, tuple[float, float], float]:
    """Viewpoint variation: global rotation jitter +-0.3 rad/axis, scale x[0.8, 1.25]."""
    rot = tuple(r + rng.uniform(-0.3, 0.3) for r in pose.global_rotation)
    scale = 0.35 * rng.uniform(0.8, 1.25)
    center = (0.5 + rng.uniform(-0.1, 0.1), 0.5 + rng.uniform(-0.1, 0.1))
    return replace(pose, global_rotation=rot), center, scale


def gen_gesture_dataset(
    classes: list[str],
    per_class: int,
    background_count: int,
    gen: GenSpec,
) -> list[tuple[FrameLandmarks, str]]:
    """Noisy single-frame samples: per_class per gesture plus background
    samples drawn from background poses and their interpolants."""
    if per_class < 1:
        raise InvalidArgument("per_class must be >= 1")
    if background_count < 0:
        raise InvalidArgument("background_count must be >= 0")
    for name in classes:
        pose_by_name(name)  # raises UnknownPose
    rng = np.random.default_rng([gen.seed & 0xFFFFFFFFFFFFFFFF, 0x67657374])
    samples: list[tuple[FrameLandmarks, str]] = []
    frame_index = 0

    def emit(pose: HandPoseSpec, label: str):
        nonlocal frame_index
        jpose, center, scale = _jittered(pose, rng)
        hand = Handedness.RIGHT if rng.random() < 0.5 else Handedness.LEFT
        sub = GenSpec(seed=int(rng.integers(0, 2**63)), noise_sigma=gen.noise_sigma,
                      fps=gen.fps, transition_frames=gen.transition_frames)
        samples.append((render_pose(jpose, hand, sub, 0, center=center, scale=scale), label))
        frame_index += 1

    for name in classes:
        pose = pose_by_name(name)
        for _ in range(per_class):
            emit(pose, name)
    bgs = background_poses()
    for i in range(background_count):
        if i % 2 == 0 or len(bgs) < 2:
            emit(bgs[int(rng.integers(0, len(bgs)))], "background")
        else:
            a, b = rng.choice(len(bgs), size=2, replace=False)
            t = rng.uniform(0.3, 0.7)
            emit(_interpolate(bgs[a], bgs[b], t, "bg_mix"), "background")
    return samples


def default_gesture_classes() -> list[str]:
    """The 7 default gesture class names used by the evaluation sweep."""
    return [p.name for p in gesture_poses()][:7]
