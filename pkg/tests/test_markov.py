"""Backoff-chain formulas checked against brute-force chain reconstructions."""

import math
from fractions import Fraction

import pytest

from dcfwb.errors import DegenerateIdle, PeqOutOfRange
from dcfwb.markov import (
    chain_normalization,
    collision_probability,
    failure_probability,
    queue_busy_probability,
    stationary_split,
    tau_saturated,
    tau_unsaturated,
)


def alpha_by_summation(p_eq, cw_min, max_stage):
    """Total chain mass per unit of b_00, summed state by state.

    Stage head masses are b_i0 = P^i b_00 below the cap and
    b_m0 = P^m / (1 - P) b_00 at the cap; each stage contributes
    (W_i + 1) / 2 slots on average.
    """
    p = Fraction(p_eq)
    total = Fraction(0)
    for stage in range(max_stage):
        window = cw_min * 2 ** stage
        total += p ** stage * Fraction(window + 1, 2)
    window = cw_min * 2 ** max_stage
    total += p ** max_stage / (1 - p) * Fraction(window + 1, 2)
    return total


class TestFailureProbability:
    def test_inclusion_exclusion(self):
        assert failure_probability(0.3, 0.2) == pytest.approx(
            0.44, rel=1e-12)

    def test_edges(self):
        assert failure_probability(0.0, 0.0) == 0.0
        assert failure_probability(1.0, 0.3) == 1.0
        assert failure_probability(0.0, 0.7) == 0.7

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            failure_probability(1.5, 0.0)


class TestChainNormalization:
    def test_zero_failure_value(self):
        assert chain_normalization(0.0, 32, 5) == 16.5

    def test_half_failure_no_singularity(self):
        # every (2P)^i term is exactly 1
        assert chain_normalization(0.5, 32, 5) == pytest.approx(
            113.0, rel=1e-14)

    @pytest.mark.parametrize("p_eq", [0.01, 0.1, 0.25, 0.5, 0.7, 0.95])
    def test_matches_state_by_state_sum(self, p_eq):
        expected = float(alpha_by_summation(p_eq, 32, 5))
        assert chain_normalization(p_eq, 32, 5) == pytest.approx(
            expected, rel=1e-12)

    @pytest.mark.parametrize("cw_min,max_stage", [(16, 3), (8, 0), (64, 7)])
    def test_other_chain_shapes(self, cw_min, max_stage):
        for p_eq in (0.0, 0.2, 0.5, 0.8):
            expected = float(alpha_by_summation(p_eq, cw_min, max_stage))
            assert chain_normalization(p_eq, cw_min, max_stage) \
                == pytest.approx(expected, rel=1e-12)

    def test_continuous_through_one_half(self):
        lo = chain_normalization(0.5 - 1e-9, 32, 5)
        hi = chain_normalization(0.5 + 1e-9, 32, 5)
        assert lo == pytest.approx(113.0, abs=1e-5)
        assert hi == pytest.approx(113.0, abs=1e-5)

    def test_rejects_certain_failure(self):
        with pytest.raises(PeqOutOfRange):
            chain_normalization(1.0, 32, 5)


class TestTauSaturated:
    def test_ideal_channel_value(self):
        assert tau_saturated(0.0, 32, 5) == 2 / 33

    def test_half_failure_value(self):
        assert tau_saturated(0.5, 32, 5) == pytest.approx(
            2 / 113, rel=1e-14)

    @pytest.mark.parametrize("p_eq", [0.0, 0.05, 0.3, 0.5, 0.8, 0.99])
    def test_reciprocal_of_chain_mass(self, p_eq):
        # tau = b_00 / (1 - P) with b_00 = 1 / alpha
        alpha = chain_normalization(p_eq, 32, 5)
        assert tau_saturated(p_eq, 32, 5) == pytest.approx(
            1.0 / ((1.0 - p_eq) * alpha), rel=1e-12)

    def test_monotone_decreasing_in_failure(self):
        grid = [i / 200 for i in range(199)]
        values = [tau_saturated(p, 32, 5) for p in grid]
        for lo, hi in zip(values, values[1:]):
            assert hi < lo

    def test_rejects_certain_failure(self):
        with pytest.raises(PeqOutOfRange):
            tau_saturated(1.0, 32, 5)


class TestTauUnsaturated:
    def test_reduces_to_saturated_at_full_queue(self):
        for p_eq in (0.0, 0.2, 0.5, 0.9):
            alpha = chain_normalization(p_eq, 32, 5)
            assert tau_unsaturated(1.0, p_eq, alpha) == pytest.approx(
                tau_saturated(p_eq, 32, 5), rel=1e-12)

    def test_vanishes_linearly_in_q(self):
        alpha = chain_normalization(0.1, 32, 5)
        tiny = tau_unsaturated(1e-9, 0.1, alpha)
        assert tiny == pytest.approx(1e-9 / (1.0 - 0.1), rel=1e-6)
        assert tau_unsaturated(0.0, 0.1, alpha) == 0.0

    def test_monotone_increasing_in_q(self):
        alpha = chain_normalization(0.3, 32, 5)
        values = [tau_unsaturated(q / 100, 0.3, alpha) for q in range(101)]
        for lo, hi in zip(values, values[1:]):
            assert hi > lo

    def test_rejects_bad_alpha(self):
        with pytest.raises(ValueError):
            tau_unsaturated(0.5, 0.1, 0.9)


class TestStationarySplit:
    def test_saturated_head_mass(self):
        alpha = chain_normalization(0.0, 32, 5)
        b00, idle = stationary_split(1.0, alpha, 0.5)
        assert b00 == pytest.approx(1 / 16.5, rel=1e-14)
        assert idle == 0.0

    def test_idle_mass_balance(self):
        alpha = chain_normalization(0.2, 32, 5)
        q, p_i0 = 0.4, 0.05
        b00, idle = stationary_split(q, alpha, p_i0)
        # total mass is one
        assert alpha * b00 + idle == pytest.approx(1.0, rel=1e-12)
        # idle outflow equals idle inflow: b_I P_I0 = b_00 (1 - q)
        assert idle * p_i0 == pytest.approx(b00 * (1 - q), rel=1e-12)

    def test_absorbing_idle_rejected(self):
        with pytest.raises(DegenerateIdle):
            stationary_split(0.5, 16.5, 0.0)
        with pytest.raises(DegenerateIdle):
            stationary_split(0.0, 16.5, 0.0)


class TestCollisionProbability:
    def test_two_stations(self):
        assert collision_probability(0, [0.1, 0.25]) == pytest.approx(
            0.25, rel=1e-12)
        assert collision_probability(1, [0.1, 0.25]) == pytest.approx(
            0.1, rel=1e-12)

    def test_excludes_own_attempt(self):
        assert collision_probability(0, [1.0]) == 0.0

    def test_complement_product(self):
        taus = [0.1, 0.2, 0.3, 0.4]
        expected = 1.0 - 0.8 * 0.7 * 0.6
        assert collision_probability(0, taus) == pytest.approx(
            expected, rel=1e-12)


class TestQueueBusyProbability:
    def test_frozen_value(self):
        assert queue_busy_probability(100.0, 2e-3) == pytest.approx(
            0.18126924692201815, rel=1e-14)

    def test_edges(self):
        assert queue_busy_probability(0.0, 1e-3) == 0.0
        assert queue_busy_probability(1e9, 1.0) == 1.0

    def test_tiny_rate_keeps_precision(self):
        # expm1 path: q ~ lambda T_av without cancellation
        assert queue_busy_probability(1e-12, 1e-4) == pytest.approx(
            1e-16, rel=1e-9)

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            queue_busy_probability(-1.0, 1e-3)
        with pytest.raises(ValueError):
            queue_busy_probability(1.0, -1e-3)


class TestProbabilityClamping:
    def test_tiny_excursions_absorbed(self):
        assert failure_probability(-1e-13, 0.5) == 0.5
        assert failure_probability(1.0 + 1e-13, 0.0) == 1.0

    def test_large_excursions_rejected(self):
        with pytest.raises(ValueError):
            failure_probability(-1e-9, 0.5)
