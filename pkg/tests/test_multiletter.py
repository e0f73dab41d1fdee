# tests/test_multiletter.py
"""Directed information, causal laws and the single-letter embedding"""

import numpy as np
import pytest

from src.errors.exceptions import (
    BudgetExceededError,
    NonNormalizedError,
    NonNormalizedJointError,
    ShapeMismatchError,
)
from src.inforate.information_rates import (
    assemble_joint,
    build_input_policy,
    mutual_information,
    rate_triple,
    symmetric_policy,
    uniform_policy,
)
from src.markov.markov_chain import INFINITE, DelayProfile, validate_chain
from src.multiletter.directed_information import (
    build_causal_law,
    directed_information,
    directed_information_log_ratio,
    embed_policy,
    embedding_deficit,
    rn_point,
    sequence_joint,
    stationary_causal_law,
)

MEMORYLESS_K = [[0.3, 0.7], [0.3, 0.7]]


@pytest.fixture
def memoryless_chain():
    return validate_chain(MEMORYLESS_K, ["G", "B"])


@pytest.fixture
def skewed_policy():
    """|U| = 1, mildly state-dependent inputs on both encoders"""
    return build_input_policy(
        np.ones((2, 1)),
        [[[0.6, 0.4]], [[0.45, 0.55]]],
        [[[[0.55, 0.45]], [[0.4, 0.6]]], [[[0.5, 0.5]], [[0.35, 0.65]]]],
    )


def sequence_axes(n):
    return (
        list(range(n)),
        [n + t for t in range(n)],
        [2 * n + t for t in range(n)],
        [3 * n + t for t in range(n)],
    )


class TestCausalLaw:
    def test_step_shapes(self):
        steps = [np.full((2,), 0.5), np.full((2, 2, 2), 0.5), np.full((2, 2, 2, 2, 2), 0.5)]
        law = build_causal_law(steps, 1, 2, 2)
        assert law.n == 3
        assert law.step_shape(3) == (2, 2, 2, 2, 2)

    def test_wrong_shape(self):
        with pytest.raises(ShapeMismatchError):
            build_causal_law([np.full((2, 2), 0.5)], 1, 2, 2)

    def test_not_normalized(self):
        with pytest.raises(NonNormalizedError):
            build_causal_law([np.array([0.7, 0.7])], 1, 2, 2)

    def test_horizon_budget(self):
        with pytest.raises(BudgetExceededError):
            stationary_causal_law(np.full(2, 0.5), INFINITE, 5, 2)

    def test_alphabet_budget(self):
        with pytest.raises(BudgetExceededError):
            stationary_causal_law(np.full(5, 0.2), INFINITE, 2, 2)

    def test_stationary_law_uses_fallback_before_delay(self):
        table = np.array([[0.9, 0.1], [0.2, 0.8]])
        law = stationary_causal_law(table, 2, 3, 2)
        np.testing.assert_allclose(law.steps[0], [0.55, 0.45])
        np.testing.assert_allclose(law.steps[2][0, 1, 1, :], [0.2, 0.8])
        np.testing.assert_allclose(law.steps[2][1, 0, 0, :], [0.9, 0.1])


class TestDirectedInformation:
    def test_single_step_is_mutual_information(self, good_bad_chain, bsc_pair, skewed_policy):
        delays = DelayProfile(d1=0, d2=0)
        laws = embed_policy(good_bad_chain, delays, skewed_policy, 1)
        joint = sequence_joint(good_bad_chain, bsc_pair, laws, 1)
        assert directed_information(joint, [1], [3]) == pytest.approx(mutual_information(joint, [1], [3]), abs=1e-12)

    def test_expectation_form_matches_sum_form(self, good_bad_chain, bsc_pair, skewed_policy):
        n = 2
        laws = embed_policy(good_bad_chain, DelayProfile(d1=1, d2=0), skewed_policy, n)
        joint = sequence_joint(good_bad_chain, bsc_pair, laws, n)
        _, x1, x2, y = sequence_axes(n)
        summed = directed_information(joint, [x1, x2], y)
        expected = directed_information_log_ratio(joint, [x1, x2], y)
        assert summed == pytest.approx(expected, abs=1e-10)

    def test_sequence_joint_is_a_pmf(self, good_bad_chain, bsc_pair, skewed_policy):
        laws = embed_policy(good_bad_chain, DelayProfile(d1=2, d2=1), skewed_policy, 3)
        joint = sequence_joint(good_bad_chain, bsc_pair, laws, 3)
        assert joint.shape == (2,) * 12
        assert joint.sum() == pytest.approx(1.0, abs=1e-12)
        state_marginal = joint.sum(axis=tuple(range(1, 12)))
        np.testing.assert_allclose(state_marginal, good_bad_chain.pi, atol=1e-12)

    def test_noiseless_copy_counts_every_bit(self):
        n = 3
        eye = np.eye(2)
        # uniform i.i.d. x^3 and y_i = x_i
        joint = np.einsum("ad,be,cf->abcdef", eye, eye, eye) / 2 ** n
        x, y = list(range(n)), [n + t for t in range(n)]
        assert directed_information(joint, x, y) == pytest.approx(3.0, abs=1e-12)
        assert directed_information_log_ratio(joint, x, y) == pytest.approx(3.0, abs=1e-12)

    def test_memoryless_channel_adds_per_letter_information(self):
        px = np.array([0.3, 0.7])
        W = np.array([[0.8, 0.2], [0.2, 0.8]])
        letter = px[:, None] * W
        joint = np.einsum("ac,bd->abcd", letter, letter)
        single = mutual_information(letter, [0], [1])
        assert single > 0.1
        assert directed_information(joint, [0, 1], [2, 3]) == pytest.approx(2 * single, abs=1e-12)

    def test_rejects_non_pmf(self):
        with pytest.raises(NonNormalizedJointError):
            directed_information(np.full((2, 2), 0.3), [0], [1])

    def test_input_length_must_match(self):
        with pytest.raises(ShapeMismatchError):
            directed_information(np.full((2, 2, 2), 0.125), [0, 1], [2])


class TestEmbedding:
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_memoryless_matches_single_letter(self, memoryless_chain, bsc_pair, n):
        delays = DelayProfile(d1=0, d2=0)
        policy = symmetric_policy(
            np.ones((2, 1)),
            [[[0.7, 0.3]], [[0.4, 0.6]]],
            [[[0.2, 0.8]], [[0.5, 0.5]]],
        )
        single = rate_triple(assemble_joint(memoryless_chain, delays, bsc_pair, policy))
        multi = rn_point(memoryless_chain, delays, bsc_pair, embed_policy(memoryless_chain, delays, policy, n), n)
        assert multi.r1 == pytest.approx(single.r1, abs=1e-9)
        assert multi.r2 == pytest.approx(single.r2, abs=1e-9)
        assert multi.rsum == pytest.approx(single.rsum, abs=1e-9)

    def test_markov_deficit_shrinks(self, good_bad_chain, bsc_pair, skewed_policy):
        delays = DelayProfile(d1=1, d2=0)
        deficits = [embedding_deficit(good_bad_chain, delays, bsc_pair, skewed_policy, n) for n in range(1, 5)]
        for earlier, later in zip(deficits, deficits[1:]):
            assert later <= earlier + 1e-12
        assert deficits[-1] <= 5e-2

    def test_one_encoder_embedding(self, good_bad_chain, bsc_pair):
        delays = DelayProfile(d1=INFINITE, d2=1)
        policy = uniform_policy(1, 2, 2, 2)
        laws = embed_policy(good_bad_chain, delays, policy, 2)
        assert laws[0].delay is INFINITE
        point = rn_point(good_bad_chain, delays, bsc_pair, laws, 2)
        single = rate_triple(assemble_joint(good_bad_chain, delays, bsc_pair, policy))
        assert point.rsum == pytest.approx(single.rsum, abs=1e-9)

    def test_delay_mismatch(self, good_bad_chain, bsc_pair, skewed_policy):
        laws = embed_policy(good_bad_chain, DelayProfile(d1=1, d2=0), skewed_policy, 2)
        with pytest.raises(ShapeMismatchError):
            rn_point(good_bad_chain, DelayProfile(d1=2, d2=0), bsc_pair, laws, 2)

    def test_needs_single_auxiliary_value(self, good_bad_chain):
        with pytest.raises(ValueError):
            embed_policy(good_bad_chain, DelayProfile(d1=1, d2=0), uniform_policy(2, 2, 2, 2, aux_size=2), 2)
