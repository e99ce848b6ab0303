import numpy as np
import pytest

from gestureforge.embedder import (
    EmbeddingConfig,
    EmbeddingModel,
    clone_weights,
    embed_frame,
    embed_single,
    hand_features,
    randomize,
)
from gestureforge.errors import InvalidArgument, NoHands
from gestureforge.landmarks import FrameLandmarks, Handedness, normalize_landmarks
from gestureforge.nn import batchnorm_fwd

from .conftest import random_frame


@pytest.fixture
def model():
    return EmbeddingModel.create(seed=42)


class TestConfig:
    def test_embedding_dim_fixed(self):
        with pytest.raises(InvalidArgument):
            EmbeddingConfig(embedding_dim=64)

    def test_layer_shapes_chain(self, model):
        dims = [64, 256, 256, 128]
        for affine, (fi, fo) in zip(model.affines, zip(dims, dims[1:])):
            assert affine.w.shape == (fi, fo)

    def test_output_dim_128_for_any_hidden_config(self, rng):
        for hidden in [(32,), (16, 16, 16), (300,)]:
            model = EmbeddingModel.create(EmbeddingConfig(hidden_dims=hidden), seed=0)
            assert embed_single(model, random_frame(rng)).shape == (128,)


class TestEmbedSingle:
    def test_deterministic_inference(self, model, rng):
        f = random_frame(rng)
        a = embed_single(model, f)
        b = embed_single(model, f)
        assert a.shape == (128,)
        assert np.array_equal(a, b)

    def test_translation_scale_invariance(self, model, rng):
        f = random_frame(rng)
        base = embed_single(model, f)
        moved = FrameLandmarks(points=f.points * 2.5 + np.array([0.1, -0.2, 0.05]),
                               handedness=f.handedness, location=f.location)
        np.testing.assert_allclose(embed_single(model, moved), base, atol=1e-9)

    def test_handedness_flag_sign(self, rng):
        f = random_frame(rng, handedness=Handedness.RIGHT)
        g = FrameLandmarks(points=f.points, handedness=Handedness.LEFT, location=f.location)
        assert hand_features(f)[-1] == 1.0
        assert hand_features(g)[-1] == -1.0

    def test_matches_manual_layer_composition(self, model, rng):
        """Independent oracle: normalize, then apply the stack by hand."""
        f = random_frame(rng)
        x = np.concatenate([normalize_landmarks(f), [1.0]])[None, :]
        h = x
        for i in range(2):
            h = h @ model.affines[i].w + model.affines[i].b
            h, _ = batchnorm_fwd(h, model.batchnorms[i], training=False)
            h = np.maximum(h, 0.0)
        expected = (h @ model.affines[2].w + model.affines[2].b)[0]
        np.testing.assert_array_equal(embed_single(model, f), expected)


class TestEmbedFrame:
    def test_order_invariance_bit_exact(self, model, rng):
        for _ in range(200):
            left = random_frame(rng, handedness=Handedness.LEFT)
            right = random_frame(rng, handedness=Handedness.RIGHT)
            a = embed_frame(model, [left, right])
            b = embed_frame(model, [right, left])
            assert np.array_equal(a, b)

    def test_single_hand_equals_embed_single(self, model, rng):
        f = random_frame(rng)
        assert np.array_equal(embed_frame(model, [f]), embed_single(model, f))

    def test_two_hands_is_elementwise_sum(self, model, rng):
        l = random_frame(rng, handedness=Handedness.LEFT)
        r = random_frame(rng, handedness=Handedness.RIGHT)
        expected = embed_single(model, l) + embed_single(model, r)
        np.testing.assert_array_equal(embed_frame(model, [l, r]), expected)

    def test_no_hands(self, model):
        with pytest.raises(NoHands):
            embed_frame(model, [])


class TestCloneRandomize:
    def test_clone_is_independent(self, model):
        copy = clone_weights(model)
        copy.affines[0].w[0, 0] += 1.0
        assert model.affines[0].w[0, 0] != copy.affines[0].w[0, 0]

    def test_clone_value_equal(self, model, rng):
        copy = clone_weights(model)
        f = random_frame(rng)
        assert np.array_equal(embed_single(model, f), embed_single(copy, f))

    def test_randomize_seed_reproducible(self, model):
        a = randomize(model, 7)
        b = randomize(model, 7)
        for la, lb in zip(a.affines, b.affines):
            assert np.array_equal(la.w, lb.w)

    def test_randomize_different_seeds_differ(self, model):
        a = randomize(model, 7)
        b = randomize(model, 8)
        assert any(not np.array_equal(la.w, lb.w) for la, lb in zip(a.affines, b.affines))

    def test_randomize_resets_batchnorm_buffers(self, model):
        model.batchnorms[0].running_mean[:] = 5.0
        fresh = randomize(model, 3)
        assert np.array_equal(fresh.batchnorms[0].running_mean, np.zeros(256))
        assert np.array_equal(fresh.batchnorms[0].running_var, np.ones(256))
