from __future__ import annotations

import itertools
import math

import pytest

from stoprule import (
    AssumptionError,
    OddsSequence,
    StoppingPolicy,
    ThresholdRule,
    dice,
    last_m_threshold,
    last_m_value,
    mth_last_threshold,
    multi_odds,
    threshold,
    win_probability,
)
from stoprule.verify import Objective, dp_optimal, enumerate_policy_value

from conftest import random_sequence


def brute_force_r(seq: OddsSequence, j: int, k: int) -> float:
    indices = range(k, seq.n + 1)
    return math.fsum(
        math.prod(seq.odds[i - 1] for i in combo)
        for combo in itertools.combinations(indices, j)
    )


class TestMultiOddsTable:
    def test_unit_odds_counts_subsets(self):
        table = multi_odds(OddsSequence([0.5] * 3), 2)
        assert table.value(2, 1) == pytest.approx(3.0, abs=1e-15)

    def test_empty_product_row(self):
        table = multi_odds(dice(7, 6), 3)
        assert all(table.value(0, k) == 1.0 for k in range(1, 9))
        assert all(table.value(j, 8) == 0.0 for j in range(1, 4))

    def test_dice_tail_pairs(self):
        table = multi_odds(dice(10, 6), 2)
        assert table.value(2, 4) == pytest.approx(21 * 0.2**2, abs=1e-12)

    def test_recurrence_holds_exactly(self, rng):
        seq = random_sequence(rng, 9)
        table = multi_odds(seq, 3)
        for j in range(1, 4):
            for k in range(1, seq.n + 1):
                expected = table.value(j, k + 1) + seq.odds[k - 1] * table.value(j - 1, k + 1)
                assert table.value(j, k) == expected

    def test_subset_sum_identity(self, rng):
        for _ in range(10):
            seq = random_sequence(rng, 8)
            table = multi_odds(seq, 3)
            for j in range(4):
                for k in range(1, 9):
                    assert table.value(j, k) == pytest.approx(
                        brute_force_r(seq, j, k), rel=1e-12, abs=1e-12
                    )

    def test_positive_counts_non_increasing(self, rng):
        seq = OddsSequence([0.3, 0.0, 0.5, 0.0, 0.2])
        table = multi_odds(seq, 1)
        counts = [table.positive_count(k) for k in range(1, 7)]
        assert counts == [3, 2, 2, 1, 1, 0]

    def test_rejects_certain_success(self):
        with pytest.raises(AssumptionError):
            multi_odds(OddsSequence([0.5, 1.0]), 1)

    def test_rejects_bad_m(self):
        with pytest.raises(ValueError):
            multi_odds(dice(5, 6), 6)

    def test_window_probability_identity(self, rng):
        # Q_k * R(j, k) = P(exactly j successes among trials k..n)
        for _ in range(5):
            seq = random_sequence(rng, 10)
            table = multi_odds(seq, 3)
            for k in range(1, seq.n + 1):
                q_window = math.prod(seq.q[k - 1 :])
                for j in range(4):
                    exact = math.fsum(
                        math.prod(
                            seq.probs[i - 1] if i in combo else seq.q[i - 1]
                            for i in range(k, seq.n + 1)
                        )
                        for combo in itertools.combinations(range(k, seq.n + 1), j)
                    )
                    assert q_window * table.value(j, k) == pytest.approx(exact, abs=1e-12)


class TestMthLastThreshold:
    def test_reduces_to_single_threshold(self, rng):
        for _ in range(40):
            seq = random_sequence(rng, int(rng.integers(1, 12)))
            assert mth_last_threshold(seq, 1).s == threshold(seq).s

    def test_equal_odds_window(self):
        # exhaustive enumeration puts the optimum at 5 (value 0.375; the
        # once-suggested 4 achieves only 0.3125)
        assert mth_last_threshold(OddsSequence([0.5] * 8), 2).s == 5

    def test_dice_condition_never_met(self):
        assert mth_last_threshold(dice(10, 6), 2).s == 1

    def test_m_larger_than_n(self):
        with pytest.raises(ValueError):
            mth_last_threshold(dice(4, 6), 5)


class TestLastMThreshold:
    def test_dice_pair(self):
        assert last_m_threshold(dice(10, 6), 2).s == 3

    def test_dice_single_is_knife_edge(self):
        # trailing odds of the five last throws total exactly 1, so the
        # inclusive tail comparison stops one index before the max-k rule;
        # the two windows are equally optimal
        rule = last_m_threshold(dice(10, 6), 1)
        assert rule.s == 5
        tie_partner = win_probability(dice(10, 6), ThresholdRule(6))
        assert last_m_value(dice(10, 6), 1) == pytest.approx(tie_partner, abs=1e-12)

    def test_few_positive_odds_defaults_low(self):
        seq = OddsSequence([0.0, 0.0, 0.4])
        assert last_m_threshold(seq, 2).s == 1

    def test_monotone_in_m(self, rng):
        for _ in range(30):
            seq = random_sequence(rng, 10)
            thresholds = [last_m_threshold(seq, m).s for m in range(1, 6)]
            assert all(a >= b for a, b in zip(thresholds, thresholds[1:]))


class TestLastMValue:
    def test_full_m_is_any_success(self, rng):
        seq = random_sequence(rng, 7)
        everything = 1.0 - math.prod(seq.q)
        assert last_m_value(seq, seq.n) == pytest.approx(everything, abs=1e-12)

    def test_dice_single(self):
        assert last_m_value(dice(10, 6), 1) == pytest.approx((5 / 6) ** 5, abs=1e-12)

    def test_dice_pair_matches_enumeration(self):
        seq = dice(10, 6)
        rule = last_m_threshold(seq, 2)
        enumerated = enumerate_policy_value(
            seq, StoppingPolicy.from_threshold(rule, 10), Objective.any_of_last_m(2)
        )
        assert last_m_value(seq, 2) == pytest.approx(enumerated, abs=1e-12)
        assert last_m_value(seq, 2) == pytest.approx(0.6325850670629478, abs=1e-12)

    def test_random_instances_match_enumeration(self, rng):
        for _ in range(30):
            m = int(rng.integers(1, 4))
            seq = random_sequence(rng, 9, (Objective.any_of_last_m(m),))
            rule = last_m_threshold(seq, m)
            enumerated = enumerate_policy_value(
                seq, StoppingPolicy.from_threshold(rule, 9), Objective.any_of_last_m(m)
            )
            assert last_m_value(seq, m) == pytest.approx(enumerated, abs=1e-12)


class TestOptimality:
    def test_both_rules_achieve_dp_optimum(self, rng):
        for _ in range(40):
            n = int(rng.integers(2, 11))
            m = int(rng.integers(1, min(3, n) + 1))
            objectives = (Objective.mth_last(m), Objective.any_of_last_m(m))
            seq = random_sequence(rng, n, objectives)
            for objective, rule in (
                (Objective.mth_last(m), mth_last_threshold(seq, m)),
                (Objective.any_of_last_m(m), last_m_threshold(seq, m)),
            ):
                policy = StoppingPolicy.from_threshold(rule, n)
                achieved = enumerate_policy_value(seq, policy, objective)
                optimum = dp_optimal(seq, objective).optimal_value
                assert achieved == pytest.approx(optimum, abs=1e-12)
