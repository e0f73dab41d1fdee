# tests/test_region.py
"""Projections, envelopes, the discrete optimizer and the brute-force oracle"""

import time

import numpy as np
import pytest

from src.channel.channel_models import build_discrete_mac, identity_mac, noise_only_mac
from src.config.config import Config
from src.errors.exceptions import BudgetExceededError
from src.inforate.information_rates import (
    assemble_joint,
    build_input_policy,
    one_encoder_policy,
    random_policy,
    rate_triple,
    symmetric_policy,
)
from src.markov.markov_chain import INFINITE, DelayProfile
from src.region.rate_region import (
    brute_force_region,
    count_grid_policies,
    frontier_sweep,
    maximize_direction,
    region_contains,
    upper_concave_envelope,
    weighted_sum_max,
)
from src.region.simplex_projection import project_rows_to_simplex, project_weighted_simplex
from src.state.rate_state import PointProvenance, RatePoint


def hb(p):
    return -p * np.log2(p) - (1 - p) * np.log2(1 - p)


ZERO = DelayProfile(d1=0, d2=0)
BSC_CAPACITY = 1.0 - (hb(0.1) + hb(0.4)) / 2


class TestSimplexProjection:
    def test_rows_land_on_simplex(self):
        rng = np.random.Generator(np.random.PCG64(3))
        Y = rng.normal(size=(4, 3, 5)) * 3
        X = project_rows_to_simplex(Y)
        assert np.all(X >= 0)
        np.testing.assert_allclose(X.sum(axis=-1), 1.0, atol=1e-12)

    def test_known_projections(self):
        np.testing.assert_allclose(project_rows_to_simplex([0.5, 0.5, 0.5]), [1 / 3] * 3, atol=1e-15)
        np.testing.assert_allclose(project_rows_to_simplex([2.0, 0.0]), [1.0, 0.0], atol=1e-15)
        np.testing.assert_allclose(project_rows_to_simplex([0.3, 0.7]), [0.3, 0.7], atol=1e-15)

    def test_floor(self):
        X = project_rows_to_simplex([5.0, -1.0, -1.0], floor=0.01)
        np.testing.assert_allclose(X, [0.98, 0.01, 0.01], atol=1e-12)
        with pytest.raises(ValueError):
            project_rows_to_simplex([1.0, 0.0], floor=0.6)

    def test_large_inputs_stay_in_bounds(self):
        for Y in ([[1e6, -1e6]], [[123.456]], [[1e8 + 0.3, 1e8, 1e8 - 0.7]]):
            X = project_rows_to_simplex(Y)
            assert np.all(X >= 0.0) and np.all(X <= 1.0)
            np.testing.assert_allclose(X.sum(axis=-1), 1.0, atol=1e-12)
        np.testing.assert_array_equal(project_rows_to_simplex([[123.456]]), [[1.0]])
        X = project_rows_to_simplex([[250.0, -3.0]], floor=1e-9)
        assert X[0, 0] <= 1.0 - 1e-9 + 1e-15 and X[0, 1] >= 1e-9

    def test_weighted_projection(self):
        np.testing.assert_allclose(project_weighted_simplex([3.0, 0.0], [1.0, 1.0], 2.0), [2.0, 0.0], atol=1e-12)
        x = project_weighted_simplex([1.0, 1.0, 1.0], [0.5, 0.25, 0.25], 2.0)
        assert np.dot([0.5, 0.25, 0.25], x) == pytest.approx(2.0, abs=1e-12)
        assert np.all(x >= 0)

    def test_weighted_projection_keeps_feasible_point(self):
        w = np.array([0.2, 0.3, 0.5])
        z = np.array([4.0, 10.0, 6.4])
        np.testing.assert_allclose(project_weighted_simplex(z, w, float(w @ z)), z, atol=1e-12)

    def test_weighted_projection_edge_cases(self):
        np.testing.assert_array_equal(project_weighted_simplex([1.0, 2.0], [1.0, 1.0], 0.0), [0.0, 0.0])
        x = project_weighted_simplex([5.0, 1.0], [0.0, 1.0], 1.0)
        assert x[0] == 0.0 and x[1] == pytest.approx(1.0)

    def test_weighted_projection_is_closest_in_metric(self):
        rng = np.random.Generator(np.random.PCG64(8))
        w = np.array([0.25, 0.25, 0.5])
        m = np.array([1.0, 4.0, 2.0])
        z = np.array([3.0, -1.0, 2.0])
        x = project_weighted_simplex(z, w, 3.0, m)
        best = np.sum(m * (x - z) ** 2)
        for _ in range(200):
            cand = project_weighted_simplex(rng.uniform(0, 8, 3), w, 3.0)
            assert np.sum(m * (cand - z) ** 2) >= best - 1e-9


class TestEnvelope:
    def test_drops_interior_points(self):
        points = [RatePoint(r1=1, r2=0), RatePoint(r1=0, r2=1), RatePoint(r1=0.4, r2=0.4), RatePoint(r1=0.6, r2=0.6)]
        region = upper_concave_envelope(points)
        coords = [(p.r1, p.r2) for p in region.frontier]
        assert coords == [(0.0, 1.0), (0.6, 0.6), (1.0, 0.0)]
        assert len(region.provenance) == 3

    def test_rectangle_collapses_to_corner(self):
        region = upper_concave_envelope([RatePoint(r1=1.0, r2=2.0)] * 3)
        assert [(p.r1, p.r2) for p in region.frontier] == [(1.0, 2.0)]

    def test_first_provenance_wins(self):
        points = [RatePoint(r1=1.0, r2=1.0), RatePoint(r1=1.0, r2=1.0)]
        prov = [PointProvenance(alpha=0.5, corner_id="A"), PointProvenance(alpha=2.0, corner_id="B")]
        region = upper_concave_envelope(points, prov)
        assert region.provenance[0].alpha == 0.5

    def test_all_zero_points(self):
        region = upper_concave_envelope([RatePoint(r1=0.0, r2=0.0)])
        assert [(p.r1, p.r2) for p in region.frontier] == [(0.0, 0.0)]

    def test_provenance_length_mismatch(self):
        with pytest.raises(ValueError):
            upper_concave_envelope([RatePoint(r1=1, r2=0)], [])

    def test_support_and_containment(self):
        region = upper_concave_envelope([RatePoint(r1=1, r2=0), RatePoint(r1=0, r2=1), RatePoint(r1=0.6, r2=0.6)])
        assert region.support_value(1.0, 1.0) == pytest.approx(1.2)
        assert region.support_value(3.0, 1.0) == pytest.approx(3.0)
        assert region_contains(region, RatePoint(r1=0.5, r2=0.5))
        assert region_contains(region, RatePoint(r1=0.8, r2=0.25))
        assert not region_contains(region, RatePoint(r1=0.8, r2=0.4))
        assert not region_contains(region, RatePoint(r1=0.7, r2=0.7))
        assert not region_contains(region, RatePoint(r1=1.1, r2=0.0))


class TestDirectionOptimizer:
    def test_bsc_pair_support(self, good_bad_chain, bsc_pair, small_settings):
        for w1, w2 in [(1.0, 1.0), (2.0, 1.0), (1.0, 3.0)]:
            result = maximize_direction(good_bad_chain, ZERO, bsc_pair, w1, w2, small_settings)
            assert result.value == pytest.approx(max(w1, w2) * BSC_CAPACITY, abs=1e-6)
            assert result.point.r1 + result.point.r2 == pytest.approx(BSC_CAPACITY, abs=1e-6)

    def test_single_aux_symbol_at_equal_weights(self, good_bad_chain, bsc_pair):
        settings = Config.get_solver_settings(multi_start=2, aux_size=1, discrete_max_iter=1500, seed=3)
        result = maximize_direction(good_bad_chain, ZERO, bsc_pair, 1.0, 1.0, settings)
        assert result.policy.aux_size == 1
        np.testing.assert_array_equal(result.policy.pu, [[1.0], [1.0]])
        assert result.value == pytest.approx(BSC_CAPACITY, abs=1e-6)

    def test_ties_go_to_corner_a(self, good_bad_chain, bsc_pair, small_settings):
        result = maximize_direction(good_bad_chain, ZERO, bsc_pair, 1.0, 1.0, small_settings)
        assert result.corner_id == "A"

    def test_identity_channel_corner(self, good_bad_chain, small_settings):
        point, policy = weighted_sum_max(good_bad_chain, ZERO, identity_mac(good_bad_chain.states), 2.0, small_settings)
        assert point.r1 == pytest.approx(1.0, abs=1e-6)
        assert point.r2 == pytest.approx(0.0, abs=1e-6)
        assert policy.aux_size == small_settings.aux_size

    def test_negative_weight(self, good_bad_chain, bsc_pair):
        with pytest.raises(ValueError):
            weighted_sum_max(good_bad_chain, ZERO, bsc_pair, -1.0)

    def test_deterministic_given_seed(self, good_bad_chain, bsc_pair, small_settings):
        delays = DelayProfile(d1=1, d2=0)
        first = maximize_direction(good_bad_chain, delays, bsc_pair, 1.5, 1.0, small_settings)
        second = maximize_direction(good_bad_chain, delays, bsc_pair, 1.5, 1.0, small_settings)
        assert first.point == second.point
        np.testing.assert_array_equal(first.policy.px2, second.policy.px2)

    def test_beats_random_policies(self, good_bad_chain, bsc_pair, small_settings):
        delays = DelayProfile(d1=1, d2=0)
        result = maximize_direction(good_bad_chain, delays, bsc_pair, 1.0, 1.0, small_settings)
        rng = Config.get_rng(4)
        for _ in range(25):
            rates = rate_triple(assemble_joint(good_bad_chain, delays, bsc_pair, random_policy(rng, 2, 2, 2, 2)))
            assert rates.rsum <= result.value + 1e-6


class TestFrontierSweep:
    def test_noise_only_region_is_origin(self, good_bad_chain, small_settings):
        region = frontier_sweep(good_bad_chain, ZERO, noise_only_mac(good_bad_chain.states), [1.0], small_settings)
        assert region.max_r1() == pytest.approx(0.0, abs=1e-9)
        assert region.max_r2() == pytest.approx(0.0, abs=1e-9)

    def test_identity_region(self, good_bad_chain, small_settings):
        region = frontier_sweep(good_bad_chain, ZERO, identity_mac(good_bad_chain.states), [0.5, 2.0], small_settings)
        assert region.max_r1() == pytest.approx(1.0, abs=1e-6)
        assert region.max_r2() == pytest.approx(0.0, abs=1e-6)

    def test_empty_alphas(self, good_bad_chain, bsc_pair):
        with pytest.raises(ValueError):
            frontier_sweep(good_bad_chain, ZERO, bsc_pair, [])

    def test_provenance_records_hash(self, good_bad_chain, bsc_pair, small_settings):
        region = frontier_sweep(good_bad_chain, ZERO, bsc_pair, [1.0], small_settings)
        hashed = [p for p in region.provenance if p.corner_id in ("A", "B")]
        assert hashed and all(len(p.policy_hash) == 12 for p in hashed)


class TestBruteForce:
    def test_policy_count(self, good_bad_chain, bsc_pair):
        assert count_grid_policies(good_bad_chain, ZERO, bsc_pair, 0.1) == 11 ** 4

    def test_budget(self, good_bad_chain, bsc_pair):
        with pytest.raises(BudgetExceededError):
            brute_force_region(good_bad_chain, ZERO, bsc_pair, 0.1, budget=100)

    def test_bad_grid_step(self, good_bad_chain, bsc_pair):
        with pytest.raises(ValueError):
            brute_force_region(good_bad_chain, ZERO, bsc_pair, 0.3)

    @pytest.mark.slow
    def test_sweep_matches_brute_force(self, good_bad_chain, bsc_pair):
        start = time.perf_counter()
        corners = brute_force_region(good_bad_chain, ZERO, bsc_pair, 0.1)
        assert len(corners) == 2 * 11 ** 4
        settings = Config.get_solver_settings(multi_start=4, aux_size=2, discrete_max_iter=1500, seed=5)
        alphas = [0.0, 0.25, 0.5, 1.0, 2.0, 4.0]
        region = frontier_sweep(good_bad_chain, ZERO, bsc_pair, alphas, settings)

        for corner in corners:
            assert region_contains(region, corner, tol=1e-6)
        for w1, w2 in [(a, 1.0) for a in alphas] + [(1.0, a) for a in alphas]:
            oracle = max(c.support(w1, w2) for c in corners)
            swept = region.support_value(w1, w2)
            assert swept >= oracle - 1e-6
            assert swept <= oracle + 0.02
        assert time.perf_counter() - start < 600


@pytest.fixture
def or_and_mac(good_bad_chain):
    """Y = X1 or X2 in G, Y = X1 and X2 in B; the best inputs depend on the state"""
    tables = {}
    for state, gate in (("G", np.logical_or), ("B", np.logical_and)):
        table = np.zeros((2, 2, 2))
        for x1 in range(2):
            for x2 in range(2):
                table[x1, x2, int(gate(x1, x2))] = 1.0
        tables[state] = table
    return build_discrete_mac({"X1": 2, "X2": 2, "Y": 2}, tables, good_bad_chain.states)


class TestRegionInvariants:
    ALPHAS = [0.5, 1.0, 2.0]
    SWEPT = [(a, 1.0) for a in ALPHAS] + [(1.0, a) for a in ALPHAS]

    @pytest.mark.parametrize(
        "delays",
        [DelayProfile(d1=1, d2=0), DelayProfile(d1=2, d2=1), DelayProfile(d1=INFINITE, d2=1)],
        ids=lambda d: d.label(),
    )
    def test_delay_never_enlarges_region(self, good_bad_chain, or_and_mac, small_settings, delays):
        perfect = frontier_sweep(good_bad_chain, ZERO, or_and_mac, self.ALPHAS, small_settings)
        delayed = frontier_sweep(good_bad_chain, delays, or_and_mac, self.ALPHAS, small_settings)
        for w1, w2 in self.SWEPT:
            ceiling = perfect.support_value(w1, w2)
            for point in delayed.frontier:
                assert point.support(w1, w2) <= ceiling + 1e-3

    def test_perfect_csi_sum_rate_ceiling(self, good_bad_chain, or_and_mac, small_settings):
        # |Y| = 2 caps every sum rate at one bit, reached only with current state knowledge
        perfect = frontier_sweep(good_bad_chain, ZERO, or_and_mac, [1.0], small_settings)
        stale = frontier_sweep(good_bad_chain, DelayProfile(d1=30, d2=30), or_and_mac, [1.0], small_settings)
        assert perfect.support_value(1.0, 1.0) == pytest.approx(1.0, abs=1e-3)
        assert stale.support_value(1.0, 1.0) <= 1.0 + 1e-9
        assert stale.support_value(1.0, 1.0) < 0.9

    def test_swapping_encoders_swaps_rates(self, good_bad_chain, or_and_mac, rng):
        delays = DelayProfile(d1=1, d2=1)
        pu = rng.dirichlet(np.ones(2), size=2)
        px1 = rng.dirichlet(np.ones(2), size=(2, 2))
        px2 = rng.dirichlet(np.ones(2), size=(2, 2))
        forward = rate_triple(assemble_joint(good_bad_chain, delays, or_and_mac, symmetric_policy(pu, px1, px2)))
        swapped = rate_triple(assemble_joint(good_bad_chain, delays, or_and_mac, symmetric_policy(pu, px2, px1)))
        assert forward.r1 == pytest.approx(swapped.r2, abs=1e-12)
        assert forward.r2 == pytest.approx(swapped.r1, abs=1e-12)
        assert forward.rsum == pytest.approx(swapped.rsum, abs=1e-12)

    def test_symmetric_channel_gives_symmetric_region(self, good_bad_chain, bsc_pair, small_settings):
        region = frontier_sweep(good_bad_chain, DelayProfile(d1=1, d2=1), bsc_pair, self.ALPHAS, small_settings)
        assert region.max_r1() == pytest.approx(region.max_r2(), abs=1e-6)
        assert region.support_value(2.0, 1.0) == pytest.approx(region.support_value(1.0, 2.0), abs=1e-6)

    def test_one_encoder_policy_matches_stateless_finite_policy(self, good_bad_chain, or_and_mac, rng):
        pq = rng.dirichlet(np.ones(2))
        px1 = rng.dirichlet(np.ones(2), size=2)
        px2 = rng.dirichlet(np.ones(2), size=(2, 2))
        blind = one_encoder_policy(pq, px1, px2)
        ignoring = build_input_policy(
            np.broadcast_to(pq, (2, 2)),
            np.broadcast_to(px1, (2, 2, 2)),
            np.broadcast_to(px2[None], (2, 2, 2, 2)),
        )
        a = rate_triple(assemble_joint(good_bad_chain, DelayProfile(d1=INFINITE, d2=1), or_and_mac, blind))
        b = rate_triple(assemble_joint(good_bad_chain, DelayProfile(d1=3, d2=1), or_and_mac, ignoring))
        assert a.r1 == pytest.approx(b.r1, abs=1e-12)
        assert a.r2 == pytest.approx(b.r2, abs=1e-12)
        assert a.rsum == pytest.approx(b.rsum, abs=1e-12)
