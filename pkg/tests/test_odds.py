from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stoprule import (
    ONE_OVER_E,
    OddsSequence,
    StoppingPolicy,
    ThresholdRule,
    dice,
    grouped,
    one_over_e_check,
    secretary,
    threshold,
    time_embedded,
    win_probability,
    with_availability,
)
from stoprule.verify import Objective, enumerate_policy_value

from conftest import random_sequence, tied_sequence

DICE_VALUE = (5.0 / 6.0) ** 5


class TestOddsSequence:
    def test_derived_views(self):
        seq = OddsSequence([0.5, 0.2])
        assert seq.n == 2
        assert seq.q == (0.5, 0.8)
        assert seq.odds == (1.0, 0.25)

    def test_certain_success_gets_infinite_marker(self):
        seq = OddsSequence([1.0, 0.5])
        assert math.isinf(seq.odds[0])
        assert seq.exact_odds[0] is None
        assert seq.has_infinite_odds()

    def test_rejects_bad_probabilities(self):
        with pytest.raises(ValueError):
            OddsSequence([])
        with pytest.raises(ValueError):
            OddsSequence([0.5, 1.2])
        with pytest.raises(ValueError):
            OddsSequence([-0.1])


class TestThreshold:
    def test_dice_paper_value(self):
        assert threshold(dice(10, 6)).s == 6

    def test_below_one_sum_defaults_to_one(self):
        assert threshold(OddsSequence([0.1, 0.1])).s == 1

    def test_secretary_ten(self):
        assert threshold(secretary(10)).s == 4

    def test_exact_tie_takes_larger_index(self):
        # two fair coins at the end: trailing odds reach 1 at the last index
        assert threshold(dice(5, 2)).s == 5

    def test_single_trial(self):
        assert threshold(dice(1, 6)).s == 1

    def test_scan_is_single_backward_pass(self):
        class CountingOdds:
            def __init__(self, values):
                self.values = tuple(values)
                self.reads = 0

            def __getitem__(self, idx):
                if isinstance(idx, slice):
                    return self.values[idx]
                self.reads += 1
                return self.values[idx]

        class Stub:
            n = 50
            odds = CountingOdds([0.2] * 50)
            exact_odds = tuple(Fraction(1, 5) for _ in range(50))

        stub = Stub()
        rule = threshold(stub)
        assert rule.s == 46
        assert stub.odds.reads == 50 - 46 + 1  # early exit, one read per index


class TestWinProbability:
    def test_dice_value(self):
        assert win_probability(dice(10, 6), ThresholdRule(6)) == pytest.approx(
            DICE_VALUE, abs=1e-15
        )

    def test_two_trials_enumeration(self):
        # all four outcomes: win on exactly one success = 0.09 + 0.09
        assert win_probability(OddsSequence([0.1, 0.1]), ThresholdRule(1)) == pytest.approx(
            0.18, abs=1e-15
        )

    def test_single_trial(self):
        assert win_probability(OddsSequence([0.3]), ThresholdRule(1)) == 0.3

    def test_certain_success_in_window(self):
        seq = OddsSequence([0.5, 1.0, 0.5])
        # exactly one success in [1,3] forces the certain index to be it
        assert win_probability(seq, ThresholdRule(1)) == pytest.approx(0.25, abs=1e-15)

    def test_two_certain_successes_make_zero(self):
        seq = OddsSequence([1.0, 1.0])
        assert win_probability(seq, ThresholdRule(1)) == 0.0

    def test_out_of_range_threshold(self):
        with pytest.raises(ValueError):
            win_probability(OddsSequence([0.5]), ThresholdRule(2))

    @settings(max_examples=60, deadline=None)
    @given(
        st.lists(st.floats(min_value=0.01, max_value=0.99), min_size=1, max_size=10),
        st.data(),
    )
    def test_matches_enumeration(self, probs, data):
        seq = OddsSequence(probs)
        s = data.draw(st.integers(min_value=1, max_value=seq.n))
        direct = win_probability(seq, ThresholdRule(s))
        enumerated = enumerate_policy_value(
            seq, StoppingPolicy.from_threshold(s, seq.n), Objective.last_success()
        )
        assert direct == pytest.approx(enumerated, abs=1e-12)


class TestTieInvariance:
    def test_fifty_constructed_ties(self, rng):
        for _ in range(50):
            window = int(rng.integers(2, 7))
            lead = int(rng.integers(1, 5))
            seq, s = tied_sequence(rng, window, lead)
            v_here = win_probability(seq, ThresholdRule(s))
            v_prev = win_probability(seq, ThresholdRule(s - 1))
            assert abs(v_here - v_prev) < 1e-12


class TestOneOverE:
    def test_dice_margin(self):
        result = one_over_e_check(dice(10, 6))
        assert result.applicable
        assert result.margin == pytest.approx(DICE_VALUE - ONE_OVER_E, abs=1e-12)

    def test_secretary_holds(self):
        result = one_over_e_check(secretary(10))
        assert result.applicable and result.margin >= 0.0

    def test_not_applicable_below_one(self):
        assert one_over_e_check(OddsSequence([0.1, 0.1])) == (False, None)

    def test_randomized_bound(self, rng):
        for _ in range(200):
            seq = OddsSequence(rng.uniform(0.05, 0.95, int(rng.integers(1, 15))))
            result = one_over_e_check(seq)
            if result.applicable:
                assert result.margin >= -1e-12


class TestBuilders:
    def test_secretary_probs(self):
        assert secretary(1).probs == (1.0,)
        assert secretary(3).probs == (1.0, 0.5, pytest.approx(1 / 3))

    def test_secretary_value_display_identity(self):
        # the classical (s-1)/n * sum_{j=s-1}^{n-1} 1/j display equals R_s*Q_s
        seq = secretary(10)
        s = threshold(seq).s
        display = (s - 1) / 10 * math.fsum(1.0 / j for j in range(s - 1, 10))
        assert win_probability(seq, ThresholdRule(s)) == pytest.approx(display, abs=1e-12)
        assert win_probability(seq, ThresholdRule(s)) == pytest.approx(0.3987, abs=5e-5)

    def test_dice_validation(self):
        with pytest.raises(ValueError):
            dice(0, 6)
        with pytest.raises(ValueError):
            dice(5, 1)

    def test_availability_identity_and_product(self):
        seq = OddsSequence([0.5, 0.5])
        assert with_availability(seq, [1.0, 1.0]).probs == seq.probs
        assert with_availability(seq, [0.5, 1.0]).probs == (0.25, 0.5)

    def test_availability_shifts_dice_threshold(self):
        thinned = with_availability(dice(10, 6), [0.9] * 10)
        assert thinned.probs[0] == pytest.approx(0.15)
        assert threshold(thinned).s == 5

    def test_availability_length_mismatch(self):
        with pytest.raises(ValueError):
            with_availability(dice(3, 6), [0.5, 0.5])

    def test_time_embedding(self):
        assert time_embedded([0.5, 0.5], [1.0, 1.0]).probs == (0.5, 0.5)
        assert time_embedded([0.5, 0.5], [0.8, 0.2]).probs == (0.4, pytest.approx(0.1))
        with pytest.raises(ValueError):
            time_embedded([0.5], [0.5, 0.5])

    def test_time_embedding_feeds_threshold(self):
        presence = [0.9**k for k in range(1, 13)]
        seq = time_embedded([1 / 6] * 12, presence)
        rule = threshold(seq)
        direct = win_probability(seq, rule)
        enumerated = enumerate_policy_value(
            seq, StoppingPolicy.from_threshold(rule, seq.n), Objective.last_success()
        )
        assert direct == pytest.approx(enumerated, abs=1e-12)

    def test_grouped_singletons_recover_secretary(self):
        assert grouped([1] * 8).probs == secretary(8).probs

    def test_grouped_counting(self):
        assert grouped([2, 2]).probs == (1.0, 0.5)
        assert grouped([3, 1]).probs == (1.0, 0.25)
        with pytest.raises(ValueError):
            grouped([])
        with pytest.raises(ValueError):
            grouped([2, 0])

    def test_grouped_against_rank_simulation(self, rng):
        sizes = [3, 2, 4, 1, 5]
        seq = grouped(sizes)
        rule = threshold(seq)
        predicted = win_probability(seq, rule)
        bounds = np.cumsum(sizes)
        total = int(bounds[-1])
        trials = 40_000
        wins = 0
        for _ in range(trials):
            values = rng.permutation(total)
            best_group = int(np.searchsorted(bounds, int(np.argmax(values)), side="right"))
            running_best = -1
            chosen = None
            lo = 0
            for j, hi in enumerate(bounds):
                group_best = int(values[lo:hi].max())
                record = group_best > running_best
                running_best = max(running_best, group_best)
                lo = int(hi)
                if record and j + 1 >= rule.s and chosen is None:
                    chosen = j
            if chosen is not None and chosen == best_group:
                wins += 1
        estimate = wins / trials
        sigma = math.sqrt(predicted * (1 - predicted) / trials)
        assert abs(estimate - predicted) < 4 * sigma


class TestInvariantProperties:
    @settings(max_examples=80, deadline=None)
    @given(st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=1, max_size=14))
    def test_threshold_in_range_with_backward_sum(self, probs):
        seq = OddsSequence(probs)
        s = threshold(seq).s
        assert 1 <= s <= seq.n
        tail = math.fsum(seq.odds[s - 1 :])
        assert tail >= 1.0 - 1e-9 or s == 1

    def test_random_instances_match_enumeration(self, rng):
        for _ in range(60):
            seq = random_sequence(rng, int(rng.integers(1, 13)))
            rule = threshold(seq)
            direct = win_probability(seq, rule)
            enumerated = enumerate_policy_value(
                seq, StoppingPolicy.from_threshold(rule, seq.n), Objective.last_success()
            )
            assert abs(direct - enumerated) < 1e-12


class TestPolicyTypes:
    def test_threshold_rule_validation(self):
        with pytest.raises(ValueError):
            ThresholdRule(0)

    def test_policy_from_threshold(self):
        policy = StoppingPolicy.from_threshold(3, 5)
        assert policy.stop == (False, False, True, True, True)
        assert policy.stops_at(3) and not policy.stops_at(2)

    def test_policy_validation(self):
        with pytest.raises(ValueError):
            StoppingPolicy([])
        with pytest.raises(ValueError):
            StoppingPolicy.from_threshold(7, 5)
