"""The distribution algebra: one-hot encoding, interpolation, mixing."""

import logging

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from textsmooth.errors import IndexOutOfVocab, LambdaOutOfRange, ShapeMismatch
from textsmooth.repr_core import (
    EmbeddingMatrix,
    SmoothedSequence,
    TokenDistribution,
    interpolate,
    mix_embeddings,
    mixup_pair,
    one_hot_encode,
)


def random_distribution_rows(rng, seq_len, vocab_size):
    raw = rng.random((seq_len, vocab_size)) + 1e-3
    return raw / raw.sum(axis=1, keepdims=True)


class TestOneHotEncode:
    def test_single_id(self):
        seq = one_hot_encode([2], vocab_size=5)
        np.testing.assert_array_equal(seq.dense(), [[0, 0, 1, 0, 0]])

    def test_two_ids_rows_sum_to_one(self):
        seq = one_hot_encode([0, 4], vocab_size=5)
        dense = seq.dense()
        np.testing.assert_array_equal(dense.sum(axis=1), [1.0, 1.0])
        assert dense[0, 0] == 1.0 and dense[1, 4] == 1.0
        assert np.count_nonzero(dense) == 2

    @pytest.mark.parametrize("ids", [[5], [-1], [0, 7]])
    def test_out_of_vocab(self, ids):
        with pytest.raises(IndexOutOfVocab):
            one_hot_encode(ids, vocab_size=5)

    def test_empty_sequence_rejected(self):
        with pytest.raises(ShapeMismatch):
            one_hot_encode([], vocab_size=5)


class TestInterpolate:
    def test_lambda_one_returns_onehot_exactly(self):
        rng = np.random.default_rng(0)
        onehot = one_hot_encode([1, 3, 0], vocab_size=4)
        smoothed = SmoothedSequence(random_distribution_rows(rng, 3, 4))
        out = interpolate(onehot, smoothed, 1.0)
        np.testing.assert_array_equal(out.rows, onehot.dense())

    def test_lambda_zero_returns_smoothed_exactly(self):
        rng = np.random.default_rng(1)
        onehot = one_hot_encode([1, 3, 0], vocab_size=4)
        smoothed = SmoothedSequence(random_distribution_rows(rng, 3, 4))
        out = interpolate(onehot, smoothed, 0.0)
        np.testing.assert_array_equal(out.rows, smoothed.rows)

    def test_hand_computed_row(self):
        # 0.1 * [0,1,0] + 0.9 * [0.2,0.5,0.3], evaluated coordinate by
        # coordinate with scalar arithmetic
        onehot = one_hot_encode([1], vocab_size=3)
        smoothed = SmoothedSequence(np.array([[0.2, 0.5, 0.3]]))
        lam = 0.1
        expected = [lam * 0.0 + 0.9 * 0.2, lam * 1.0 + 0.9 * 0.5, lam * 0.0 + 0.9 * 0.3]
        out = interpolate(onehot, smoothed, lam)
        np.testing.assert_allclose(out.rows[0], expected, atol=1e-15)
        np.testing.assert_allclose(out.rows[0], [0.18, 0.55, 0.27], atol=1e-15)

    def test_special_positions_stay_onehot(self):
        rng = np.random.default_rng(2)
        onehot = one_hot_encode([2, 1, 3], vocab_size=4)
        smoothed = SmoothedSequence(random_distribution_rows(rng, 3, 4))
        out = interpolate(onehot, smoothed, 0.5, special_mask=[True, False, True])
        np.testing.assert_array_equal(out.rows[0], onehot.dense()[0])
        np.testing.assert_array_equal(out.rows[2], onehot.dense()[2])
        assert not np.array_equal(out.rows[1], onehot.dense()[1])

    def test_uniform_policy_smooths_specials_too(self):
        rng = np.random.default_rng(3)
        onehot = one_hot_encode([2, 1], vocab_size=4)
        smoothed = SmoothedSequence(random_distribution_rows(rng, 2, 4))
        out = interpolate(onehot, smoothed, 0.5,
                          special_mask=[True, False], keep_specials=False)
        assert not np.array_equal(out.rows[0], onehot.dense()[0])

    def test_lambda_recorded(self):
        onehot = one_hot_encode([0], vocab_size=2)
        smoothed = SmoothedSequence(np.array([[0.5, 0.5]]))
        assert interpolate(onehot, smoothed, 0.25).lambda_used == 0.25

    @pytest.mark.parametrize("lam", [-0.1, 1.1, float("nan")])
    def test_lambda_out_of_range(self, lam):
        onehot = one_hot_encode([0], vocab_size=2)
        smoothed = SmoothedSequence(np.array([[0.5, 0.5]]))
        with pytest.raises(LambdaOutOfRange):
            interpolate(onehot, smoothed, lam)

    def test_shape_mismatch(self):
        onehot = one_hot_encode([0, 1], vocab_size=2)
        smoothed = SmoothedSequence(np.array([[0.5, 0.5]]))
        with pytest.raises(ShapeMismatch):
            interpolate(onehot, smoothed, 0.5)

    def test_bad_special_mask_length(self):
        onehot = one_hot_encode([0, 1], vocab_size=2)
        smoothed = SmoothedSequence(np.full((2, 2), 0.5))
        with pytest.raises(ShapeMismatch):
            interpolate(onehot, smoothed, 0.5, special_mask=[True])


class TestMixEmbeddings:
    def test_onehot_is_lookup(self):
        rng = np.random.default_rng(4)
        emb = EmbeddingMatrix(rng.normal(size=(6, 3)))
        seq = one_hot_encode([3], vocab_size=6)
        np.testing.assert_array_equal(mix_embeddings(seq, emb), emb.weights[[3]])

    def test_uniform_is_row_mean(self):
        rng = np.random.default_rng(5)
        emb = EmbeddingMatrix(rng.normal(size=(4, 2)))
        uniform = SmoothedSequence(np.full((1, 4), 0.25))
        np.testing.assert_allclose(
            mix_embeddings(uniform, emb)[0], emb.weights.mean(axis=0), atol=1e-12)

    def test_against_loop_oracle(self):
        dist = SmoothedSequence(np.array([[0.18, 0.55, 0.27]]))
        emb = EmbeddingMatrix(np.array([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]))
        # independent dense product: explicit loops, no matmul
        expected = np.zeros((1, 2))
        for i in range(1):
            for j in range(2):
                for v in range(3):
                    expected[i, j] += dist.rows[i, v] * emb.weights[v, j]
        np.testing.assert_allclose(mix_embeddings(dist, emb), expected, atol=1e-12)

    def test_vocab_mismatch(self):
        emb = EmbeddingMatrix(np.ones((4, 2)))
        with pytest.raises(ShapeMismatch):
            mix_embeddings(one_hot_encode([0], vocab_size=3), emb)


class TestMixupPair:
    @pytest.mark.parametrize("lam", [0.0, 0.3, 1.0])
    def test_identical_pair_fixed_point(self, lam):
        x = np.array([1.0, 2.0])
        y = np.array([0.0, 1.0])
        mx, my = mixup_pair(x, x, y, y, lam)
        np.testing.assert_allclose(mx, x, atol=1e-15)
        np.testing.assert_allclose(my, y, atol=1e-15)

    def test_lambda_one_returns_first(self):
        mx, my = mixup_pair([1.0, 0.0], [0.0, 1.0], [1.0], [0.0], 1.0)
        np.testing.assert_array_equal(mx, [1.0, 0.0])
        np.testing.assert_array_equal(my, [1.0])

    def test_quarter_blend(self):
        mx, my = mixup_pair([1, 0], [0, 1], [1, 0], [0, 1], 0.25)
        np.testing.assert_allclose(mx, [0.25, 0.75], atol=1e-15)
        np.testing.assert_allclose(my, [0.25, 0.75], atol=1e-15)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            mixup_pair([1, 0], [1, 0, 0], [1], [1], 0.5)


class TestValidation:
    def test_token_distribution_rejects_negative(self):
        with pytest.raises(ShapeMismatch):
            TokenDistribution(np.array([-0.1, 1.1]))

    def test_token_distribution_rejects_bad_mass(self):
        with pytest.raises(ShapeMismatch):
            TokenDistribution(np.array([0.6, 0.6]))

    def test_smoothed_sequence_row_accessor(self):
        seq = SmoothedSequence(np.array([[0.5, 0.5], [1.0, 0.0]]))
        assert seq.row(1).probs[0] == 1.0

    def test_from_rows_renormalizes_and_logs(self, caplog):
        drifted = np.array([[0.6, 0.6]])
        with caplog.at_level(logging.WARNING, logger="textsmooth.repr_core"):
            seq = SmoothedSequence.from_rows(drifted, origin="unit-test")
        assert "renormalizing" in caplog.text
        np.testing.assert_allclose(seq.rows.sum(axis=1), [1.0], atol=1e-12)

    def test_from_rows_keeps_clean_rows_silently(self, caplog):
        clean = np.array([[0.25, 0.75]])
        with caplog.at_level(logging.WARNING, logger="textsmooth.repr_core"):
            seq = SmoothedSequence.from_rows(clean)
        assert caplog.text == ""
        np.testing.assert_array_equal(seq.rows, clean)

    def test_embedding_matrix_rejects_nonfinite(self):
        with pytest.raises(ShapeMismatch):
            EmbeddingMatrix(np.array([[np.inf, 0.0]]))


# -- randomized properties ----------------------------------------------------


@given(seed=st.integers(0, 2**32 - 1),
       vocab_size=st.integers(2, 64),
       seq_len=st.integers(1, 8),
       lam=st.floats(0.0, 1.0, allow_nan=False))
@settings(max_examples=200, deadline=None)
def test_interpolation_outputs_are_distributions(seed, vocab_size, seq_len, lam):
    rng = np.random.default_rng(seed)
    onehot = one_hot_encode(rng.integers(0, vocab_size, size=seq_len), vocab_size)
    smoothed = SmoothedSequence(random_distribution_rows(rng, seq_len, vocab_size))
    out = interpolate(onehot, smoothed, lam)
    assert np.all(out.rows >= 0)
    np.testing.assert_allclose(out.rows.sum(axis=1), 1.0, atol=1e-6)


@given(seed=st.integers(0, 2**32 - 1),
       lam_pair=st.tuples(st.floats(0.0, 1.0), st.floats(0.0, 1.0)))
@settings(max_examples=100, deadline=None)
def test_interpolation_monotone_toward_onehot(seed, lam_pair):
    lam_low, lam_high = sorted(lam_pair)
    rng = np.random.default_rng(seed)
    vocab_size = int(rng.integers(2, 16))
    onehot = one_hot_encode(rng.integers(0, vocab_size, size=3), vocab_size)
    smoothed = SmoothedSequence(random_distribution_rows(rng, 3, vocab_size))
    dense = onehot.dense()
    gap_low = np.abs(interpolate(onehot, smoothed, lam_low).rows - dense)
    gap_high = np.abs(interpolate(onehot, smoothed, lam_high).rows - dense)
    assert np.all(gap_high <= gap_low + 1e-12)


@given(seed=st.integers(0, 2**32 - 1), lam=st.floats(0.0, 1.0))
@settings(max_examples=100, deadline=None)
def test_mixup_shared_label_never_moves(seed, lam):
    rng = np.random.default_rng(seed)
    x_i, x_j = rng.normal(size=4), rng.normal(size=4)
    y = rng.random(3)
    _, my = mixup_pair(x_i, x_j, y, y, lam)
    np.testing.assert_allclose(my, y, atol=1e-12)


@given(seed=st.integers(0, 2**32 - 1))
@settings(max_examples=50, deadline=None)
def test_mix_embeddings_matches_lookup_on_onehot(seed):
    rng = np.random.default_rng(seed)
    vocab_size, embed_size, seq_len = 8, 5, 4
    ids = rng.integers(0, vocab_size, size=seq_len)
    emb = EmbeddingMatrix(rng.normal(size=(vocab_size, embed_size)))
    mixed = mix_embeddings(one_hot_encode(ids, vocab_size), emb)
    np.testing.assert_array_equal(mixed, emb.weights[ids])
