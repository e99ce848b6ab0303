import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gestureforge.errors import DegenerateHand, InvalidArgument, LengthMismatch, ParseError
from gestureforge.landmarks import (
    FrameLandmarks,
    Handedness,
    LandmarkSequence,
    mnae,
    normalize_landmarks,
    read_sequences,
    write_sequences,
)

from .conftest import random_frame


def frame_from_points(pts, handedness=Handedness.RIGHT, t=0):
    return FrameLandmarks(points=np.asarray(pts, dtype=float), handedness=handedness,
                          location=(0.5, 0.5, 0.3), timestamp_ms=t)


class TestFrameInvariants:
    def test_wrong_point_count_rejected(self):
        with pytest.raises(InvalidArgument):
            FrameLandmarks(points=np.zeros((20, 3)), handedness=Handedness.LEFT,
                           location=(0.5, 0.5, 0.3))

    def test_nonfinite_rejected(self):
        pts = np.zeros((21, 3))
        pts[3, 1] = np.nan
        with pytest.raises(InvalidArgument):
            frame_from_points(pts)

    def test_nonpositive_scale_rejected(self):
        with pytest.raises(InvalidArgument):
            FrameLandmarks(points=np.zeros((21, 3)), handedness=Handedness.LEFT,
                           location=(0.5, 0.5, 0.0))

    def test_sequence_needs_increasing_timestamps(self, rng):
        frames = [random_frame(rng, timestamp_ms=5), random_frame(rng, timestamp_ms=5)]
        with pytest.raises(InvalidArgument):
            LandmarkSequence(frames=frames)


class TestNormalize:
    def test_translate_and_scale_forced(self):
        pts = np.random.default_rng(0).normal(size=(21, 3))
        pts[0] = (0.0, 0.0, 0.0)
        pts[9] = (0.0, 2.0, 0.0)
        out = normalize_landmarks(frame_from_points(pts))
        expected = (pts * 0.5).reshape(-1)
        np.testing.assert_allclose(out, expected, atol=1e-12)
        assert tuple(out[:3]) == (0.0, 0.0, 0.0)
        np.testing.assert_allclose(out[27:30], (0.0, 1.0, 0.0), atol=1e-12)

    def test_identical_points_degenerate(self):
        pts = np.full((21, 3), 0.4)
        with pytest.raises(DegenerateHand):
            normalize_landmarks(frame_from_points(pts))

    def test_idempotent(self, rng):
        f = random_frame(rng)
        once = normalize_landmarks(f)
        again = normalize_landmarks(frame_from_points(once.reshape(21, 3)))
        np.testing.assert_allclose(again, once, atol=1e-12)

    def test_wrist_exactly_zero_and_reference_unit(self, rng):
        for _ in range(50):
            out = normalize_landmarks(random_frame(rng))
            assert out[0] == 0.0 and out[1] == 0.0 and out[2] == 0.0
            assert abs(np.linalg.norm(out[27:30]) - 1.0) <= 1e-9

    def test_translation_and_scale_invariance(self, rng):
        for _ in range(25):
            f = random_frame(rng)
            base = normalize_landmarks(f)
            shift = rng.normal(size=3)
            scale = rng.uniform(0.2, 5.0)
            moved = frame_from_points(f.points * scale + shift)
            np.testing.assert_allclose(normalize_landmarks(moved), base, atol=1e-9)


def mnae_loop_oracle(predicted, truth):
    """Independent per-landmark loop, no vectorization."""
    acc = []
    for p, t in zip(predicted, truth):
        scale = math.dist(t.points[0], t.points[9])
        for i in range(21):
            acc.append(math.dist(p.points[i], t.points[i]) / scale)
    return 100.0 * sum(acc) / len(acc)


class TestMnae:
    def test_identity_zero(self, rng):
        frames = [random_frame(rng) for _ in range(4)]
        assert mnae(frames, frames) == 0.0

    def test_uniform_offset_five_percent(self, rng):
        truth = random_frame(rng)
        scale = np.linalg.norm(truth.points[9] - truth.points[0])
        moved = truth.points.copy()
        moved[:, 0] += 0.05 * scale
        pred = frame_from_points(moved)
        assert abs(mnae([pred], [truth]) - 5.0) <= 1e-9

    def test_matches_loop_oracle(self, rng):
        for _ in range(20):
            pred = [random_frame(rng) for _ in range(3)]
            truth = [random_frame(rng) for _ in range(3)]
            assert mnae(pred, truth) == pytest.approx(mnae_loop_oracle(pred, truth), rel=1e-12)

    def test_length_mismatch(self, rng):
        with pytest.raises(LengthMismatch):
            mnae([random_frame(rng)], [random_frame(rng)] * 2)

    def test_zero_scale_truth_rejected(self, rng):
        pts = np.full((21, 3), 0.2)
        truth = frame_from_points(pts)
        with pytest.raises(DegenerateHand):
            mnae([random_frame(rng)], [truth])


class TestSequenceFiles:
    def make_seq(self, rng, n_frames=3, label="wave"):
        frames = [random_frame(rng, timestamp_ms=33 * i) for i in range(n_frames)]
        return LandmarkSequence(frames=frames, label=label)

    def assert_seq_equal(self, a, b):
        assert a.label == b.label
        assert len(a.frames) == len(b.frames)
        for fa, fb in zip(a.frames, b.frames):
            assert fa.timestamp_ms == fb.timestamp_ms
            assert fa.handedness == fb.handedness
            assert fa.location == fb.location
            assert np.array_equal(fa.points, fb.points)

    def test_round_trip(self, rng, tmp_path):
        path = tmp_path / "seqs.lmk.jsonl"
        seqs = [self.make_seq(rng), self.make_seq(rng, 2, label=None)]
        write_sequences(path, seqs)
        back = read_sequences(path)
        # write-read-write is stable at the declared 9-significant-digit precision
        write_sequences(tmp_path / "again.lmk.jsonl", back)
        assert (tmp_path / "again.lmk.jsonl").read_bytes() == path.read_bytes()
        back2 = read_sequences(tmp_path / "again.lmk.jsonl")
        for a, b in zip(back, back2):
            self.assert_seq_equal(a, b)

    def test_round_trip_lossless_at_declared_precision(self, tmp_path):
        rng = np.random.default_rng(7)
        path = tmp_path / "many.lmk.jsonl"
        seqs = []
        for i in range(1000):
            n = int(rng.integers(1, 4))
            seqs.append(LandmarkSequence(
                frames=[random_frame(rng, timestamp_ms=10 * j) for j in range(n)],
                label=None if i % 3 == 0 else f"seq{i}"))
        write_sequences(path, seqs)
        once = read_sequences(path)
        write_sequences(path, once)
        twice = read_sequences(path)
        assert len(once) == len(twice) == 1000
        for a, b in zip(once, twice):
            self.assert_seq_equal(a, b)

    def test_twenty_points_is_parse_error_naming_frame(self, rng, tmp_path):
        path = tmp_path / "bad.lmk.jsonl"
        self_seq = self.make_seq(rng, 2)
        write_sequences(path, [self_seq])
        import json
        rec = json.loads(path.read_text().splitlines()[0])
        rec["frames"][1]["pts"] = rec["frames"][1]["pts"][:20]
        path.write_text(json.dumps(rec) + "\n")
        with pytest.raises(ParseError) as exc:
            read_sequences(path)
        assert "frame 1" in str(exc.value)
        assert exc.value.line == 1

    def test_empty_file_gives_empty_list(self, tmp_path):
        path = tmp_path / "empty.lmk.jsonl"
        path.write_text("")
        assert read_sequences(path) == []

    def test_invalid_json_names_line(self, tmp_path):
        path = tmp_path / "bad.lmk.jsonl"
        path.write_text("{not json\n")
        with pytest.raises(ParseError) as exc:
            read_sequences(path)
        assert exc.value.line == 1

    @given(st.integers(min_value=0, max_value=2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_round_trip_property(self, seed):
        import pathlib
        import tempfile
        rng = np.random.default_rng(seed)
        with tempfile.TemporaryDirectory() as tmp:
            tmp = pathlib.Path(tmp)
            seqs = [self.make_seq(rng, n_frames=int(rng.integers(1, 5)))]
            p1, p2 = tmp / "a.lmk.jsonl", tmp / "b.lmk.jsonl"
            write_sequences(p1, seqs)
            write_sequences(p2, read_sequences(p1))
            assert p1.read_bytes() == p2.read_bytes()
