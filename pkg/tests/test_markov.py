# tests/test_markov.py
"""Chain validation, d-step powers and the delayed-state joint law"""

import itertools
import time

import numpy as np
import pytest

from src.errors.exceptions import (
    DegenerateChainError,
    NonStochasticError,
    NotErgodicError,
    ShapeMismatchError,
)
from src.markov.markov_chain import (
    INFINITE,
    DelayProfile,
    d_step_matrix,
    delayed_joint,
    mixing_distance,
    reverse_conditional,
    two_state_chain,
    two_state_d_step,
    validate_chain,
)


class TestValidateChain:
    def test_symmetric_chain(self):
        chain = validate_chain([[0.9, 0.1], [0.1, 0.9]], ["G", "B"])
        np.testing.assert_allclose(chain.pi, [0.5, 0.5], atol=1e-12)
        assert chain.k == 2
        assert chain.index("B") == 1

    def test_stationary_law_of_asymmetric_chain(self):
        chain = validate_chain([[0.7, 0.3], [0.1, 0.9]])
        np.testing.assert_allclose(chain.pi, [0.25, 0.75], atol=1e-12)

    def test_two_state_constructor_matches_formula(self):
        chain = two_state_chain(0.1, 0.3)
        np.testing.assert_allclose(chain.pi, [0.25, 0.75], atol=1e-12)
        assert chain.transition("G", "B") == pytest.approx(0.3)
        assert chain.transition("B", "G") == pytest.approx(0.1)

    def test_stationarity_and_row_sums(self):
        chain = validate_chain([[0.5, 0.3, 0.2], [0.1, 0.6, 0.3], [0.3, 0.3, 0.4]])
        np.testing.assert_allclose(chain.pi @ chain.K, chain.pi, atol=1e-12)
        np.testing.assert_allclose(chain.K.sum(axis=1), 1.0, atol=1e-12)
        assert np.all(chain.pi > 0)

    def test_identity_is_not_ergodic(self):
        with pytest.raises(NotErgodicError):
            validate_chain([[1.0, 0.0], [0.0, 1.0]])

    def test_periodic_chain_is_rejected(self):
        with pytest.raises(NotErgodicError):
            validate_chain([[0.0, 1.0], [1.0, 0.0]])

    def test_row_sum_off_by_more_than_tolerance(self):
        with pytest.raises(NonStochasticError):
            validate_chain([[0.9, 0.09], [0.1, 0.9]])

    def test_row_sum_within_tolerance_is_renormalized(self):
        chain = validate_chain([[0.9, 0.1 + 5e-10], [0.1, 0.9]])
        np.testing.assert_allclose(chain.K.sum(axis=1), 1.0, atol=1e-15)

    def test_negative_entry(self):
        with pytest.raises(NonStochasticError):
            validate_chain([[1.1, -0.1], [0.1, 0.9]])

    def test_non_square(self):
        with pytest.raises(ShapeMismatchError):
            validate_chain([[0.5, 0.5]])

    def test_errors_are_value_errors_with_module(self):
        with pytest.raises(ValueError) as info:
            validate_chain([[1.0, 0.0], [0.0, 1.0]])
        assert info.value.describe().startswith("[markov] NotErgodicError")

    def test_arrays_are_read_only(self):
        chain = two_state_chain(0.1, 0.1)
        with pytest.raises(ValueError):
            chain.K[0, 0] = 0.5


class TestDStep:
    def test_zero_steps_is_identity(self, good_bad_chain):
        np.testing.assert_array_equal(d_step_matrix(good_bad_chain, 0), np.eye(2))
        np.testing.assert_allclose(two_state_d_step(0.1, 0.1, 0), np.eye(2), atol=1e-15)

    def test_one_step(self, good_bad_chain):
        expected = [[0.9, 0.1], [0.1, 0.9]]
        np.testing.assert_allclose(d_step_matrix(good_bad_chain, 1), expected, atol=1e-15)
        np.testing.assert_allclose(two_state_d_step(0.1, 0.1, 1), expected, atol=1e-15)

    def test_long_delay_forgets_the_state(self, good_bad_chain):
        np.testing.assert_allclose(d_step_matrix(good_bad_chain, 200), 0.5, atol=1e-9)

    def test_closed_form_small_case(self):
        chain = two_state_chain(0.2, 0.4)
        np.testing.assert_allclose(two_state_d_step(0.2, 0.4, 3), d_step_matrix(chain, 3), atol=1e-12)

    @pytest.mark.slow
    def test_closed_form_matches_matrix_power_on_grid(self):
        start = time.perf_counter()
        values = (0.05, 0.1, 0.3, 0.45)
        for g, b in itertools.product(values, values):
            chain = two_state_chain(g, b)
            for d in range(201):
                np.testing.assert_allclose(
                    two_state_d_step(g, b, d), d_step_matrix(chain, d), atol=1e-12, rtol=0
                )
        assert time.perf_counter() - start < 5.0

    def test_degenerate_chain(self):
        with pytest.raises(DegenerateChainError):
            two_state_d_step(0.0, 0.0, 3)

    def test_negative_delay(self, good_bad_chain):
        with pytest.raises(ValueError):
            d_step_matrix(good_bad_chain, -1)

    def test_mixing_distance_contracts(self, good_bad_chain):
        distances = [mixing_distance(good_bad_chain, d) for d in range(10)]
        assert distances[0] == pytest.approx(1.0)
        assert distances[1] == pytest.approx(0.8)
        assert all(b <= a + 1e-15 for a, b in zip(distances, distances[1:]))


class TestDelayProfile:
    def test_infinite_parsing(self):
        assert DelayProfile(d1="inf", d2=3).d1 is INFINITE
        assert DelayProfile(d1=float("inf"), d2=0).one_encoder

    def test_order_is_enforced(self):
        with pytest.raises(ValueError):
            DelayProfile(d1=1, d2=2)

    def test_cases(self):
        assert DelayProfile(d1=3, d2=3).case == "symmetric"
        assert DelayProfile(d1=3, d2=1).case == "asymmetric"
        assert DelayProfile(d1=INFINITE, d2=1).case == "one-encoder"
        assert DelayProfile(d1=INFINITE, d2=1).label() == "d1=inf,d2=1"
        assert DelayProfile(d1=4, d2=1).gap == 3


class TestDelayedJoint:
    def test_zero_delay_is_diagonal(self, good_bad_chain):
        table = delayed_joint(good_bad_chain, DelayProfile(d1=0, d2=0)).table
        expected = np.zeros((2, 2, 2))
        expected[0, 0, 0] = expected[1, 1, 1] = 0.5
        np.testing.assert_allclose(table, expected, atol=1e-15)

    def test_equal_delays(self, good_bad_chain):
        dj = delayed_joint(good_bad_chain, DelayProfile(d1=3, d2=3))
        pair = dj.table.sum(axis=1)
        np.testing.assert_allclose(pair, good_bad_chain.pi[:, None] * d_step_matrix(good_bad_chain, 3), atol=1e-12)

    def test_factorization(self, good_bad_chain):
        dj = delayed_joint(good_bad_chain, DelayProfile(d1=2, d2=1))
        K = good_bad_chain.K
        for a, b, s in itertools.product(range(2), repeat=3):
            assert dj.table[a, b, s] == pytest.approx(good_bad_chain.pi[a] * K[a, b] * K[b, s], abs=1e-12)

    def test_marginals(self):
        chain = validate_chain([[0.5, 0.3, 0.2], [0.1, 0.6, 0.3], [0.3, 0.3, 0.4]])
        dj = delayed_joint(chain, DelayProfile(d1=4, d2=2))
        assert dj.table.sum() == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_allclose(dj.state_marginal, chain.pi, atol=1e-12)
        np.testing.assert_allclose(dj.first_weights, chain.pi, atol=1e-12)
        np.testing.assert_allclose(dj.table.sum(axis=(0, 2)), chain.pi, atol=1e-12)

    def test_one_encoder_has_singleton_axis(self, good_bad_chain):
        dj = delayed_joint(good_bad_chain, DelayProfile(d1=INFINITE, d2=1))
        assert dj.table.shape == (1, 2, 2)
        np.testing.assert_allclose(dj.table[0], good_bad_chain.pi[:, None] * good_bad_chain.K, atol=1e-15)


def test_reverse_conditional_is_bayes():
    chain = two_state_chain(0.1, 0.3)
    back = reverse_conditional(chain, 2)
    np.testing.assert_allclose(back.sum(axis=0), 1.0, atol=1e-12)
    forward = chain.pi[:, None] * d_step_matrix(chain, 2)
    np.testing.assert_allclose(back * chain.pi[None, :], forward, atol=1e-12)
