from __future__ import annotations

import pytest

from stoprule import (
    GuardError,
    MarkovSpec,
    OddsSequence,
    StoppingPolicy,
    dice,
    hy_homogeneous_policy,
    markov_policy_value,
    mth_last_threshold,
    secretary,
    threshold,
    win_probability,
)
from stoprule.markov import markov_from_independent
from stoprule.verify import (
    Objective,
    dp_optimal,
    dp_optimal_markov,
    enumerate_policy_value,
)

from conftest import random_sequence

DICE_VALUE = (5 / 6) ** 5


class TestObjective:
    def test_kinds(self):
        assert Objective.last_success().kind == "last-success"
        assert Objective.mth_last(2).m == 2
        with pytest.raises(ValueError):
            Objective("nonsense")
        with pytest.raises(ValueError):
            Objective.any_of_last_m(0)


class TestEnumeration:
    def test_two_trial_threshold(self):
        value = enumerate_policy_value(
            OddsSequence([0.1, 0.1]),
            StoppingPolicy.from_threshold(1, 2),
            Objective.last_success(),
        )
        assert value == pytest.approx(0.18, abs=1e-15)

    def test_eager_stopping_is_suboptimal_on_dice(self):
        eager = enumerate_policy_value(
            dice(10, 6), StoppingPolicy.from_threshold(1, 10), Objective.last_success()
        )
        assert eager < DICE_VALUE

    def test_never_stopping_scores_zero(self):
        policy = StoppingPolicy([False] * 6)
        assert enumerate_policy_value(dice(6, 6), policy, Objective.last_success()) == 0.0

    def test_horizon_guard(self):
        with pytest.raises(GuardError):
            enumerate_policy_value(
                OddsSequence([0.5] * 21),
                StoppingPolicy.from_threshold(1, 21),
                Objective.last_success(),
            )

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            enumerate_policy_value(
                dice(5, 6), StoppingPolicy.from_threshold(1, 4), Objective.last_success()
            )


class TestDpOptimal:
    def test_dice_reproduces_sum_the_odds(self):
        result = dp_optimal(dice(10, 6), Objective.last_success())
        assert result.optimal_value == pytest.approx(DICE_VALUE, abs=1e-12)
        assert result.optimal_policy.stop.index(True) + 1 == 6

    def test_single_trial(self):
        result = dp_optimal(OddsSequence([0.3]), Objective.last_success())
        assert result.optimal_value == pytest.approx(0.3)
        assert result.optimal_policy.stop == (True,)

    def test_threshold_shape_on_positive_odds(self, rng):
        for _ in range(40):
            seq = OddsSequence(rng.uniform(0.05, 0.9, int(rng.integers(1, 14))))
            mask = dp_optimal(seq, Objective.last_success()).optimal_policy.stop
            first = mask.index(True)
            assert all(mask[first:])

    def test_equal_odds_mth_last_matches_rule(self):
        seq = OddsSequence([0.5] * 8)
        rule = mth_last_threshold(seq, 2)
        achieved = enumerate_policy_value(
            seq, StoppingPolicy.from_threshold(rule, 8), Objective.mth_last(2)
        )
        assert achieved == pytest.approx(
            dp_optimal(seq, Objective.mth_last(2)).optimal_value, abs=1e-12
        )

    def test_guards(self):
        with pytest.raises(GuardError):
            dp_optimal(OddsSequence([0.5] * 26), Objective.last_success())
        with pytest.raises(GuardError):
            dp_optimal(OddsSequence([0.5] * 16), Objective.mth_last(2))

    def test_threshold_rule_attains_optimum(self, rng):
        for _ in range(50):
            seq = random_sequence(rng, int(rng.integers(1, 13)))
            rule = threshold(seq)
            optimum = dp_optimal(seq, Objective.last_success()).optimal_value
            assert win_probability(seq, rule) == pytest.approx(optimum, abs=1e-12)


class TestDpOptimalMarkov:
    def test_independent_embedding_matches_bernoulli_dp(self):
        seq = dice(10, 6)
        spec = markov_from_independent(seq)
        markov_value = dp_optimal_markov(spec).optimal_value
        direct = dp_optimal(seq, Objective.last_success()).optimal_value
        assert markov_value == pytest.approx(direct, abs=1e-12)

    def test_grid_point_matches_closed_form(self):
        spec = MarkovSpec.homogeneous(0.1, 0.6, 12, rho=0.5)
        policy = hy_homogeneous_policy(0.1, 0.6, 12)
        assert dp_optimal_markov(spec).optimal_value == pytest.approx(
            markov_policy_value(spec, policy), abs=1e-10
        )

    def test_zero_horizon(self):
        spec = MarkovSpec(N=0, alphas=(0.3,), betas=(0.6,), rho=0.4)
        result = dp_optimal_markov(spec)
        assert result.optimal_value == pytest.approx(0.4)
        assert result.optimal_policy.phi == (1,)

    def test_mask_invariant_to_rho(self, rng):
        for _ in range(20):
            N = int(rng.integers(1, 12))
            alphas = tuple(rng.uniform(0, 1, N + 1))
            betas = tuple(rng.uniform(0, 1, N + 1))
            masks = {
                dp_optimal_markov(
                    MarkovSpec(N=N, alphas=alphas, betas=betas, rho=r)
                ).optimal_policy.phi
                for r in (0.1, 0.9)
            }
            assert len(masks) == 1

    def test_guard(self):
        with pytest.raises(GuardError):
            dp_optimal_markov(MarkovSpec.homogeneous(0.2, 0.6, 26))

    def test_optimal_policy_value_consistency(self, rng):
        for _ in range(30):
            N = int(rng.integers(1, 12))
            spec = MarkovSpec(
                N=N,
                alphas=tuple(rng.uniform(0.02, 0.98, N + 1)),
                betas=tuple(rng.uniform(0.02, 0.98, N + 1)),
                rho=float(rng.uniform(0, 1)),
            )
            result = dp_optimal_markov(spec)
            replay = markov_policy_value(spec, result.optimal_policy)
            assert replay == pytest.approx(result.optimal_value, abs=1e-12)


class TestSecretaryOracleAgreement:
    def test_secretary_ten(self):
        seq = secretary(10)
        rule = threshold(seq)
        enumerated = enumerate_policy_value(
            seq, StoppingPolicy.from_threshold(rule, 10), Objective.last_success()
        )
        assert win_probability(seq, rule) == pytest.approx(enumerated, abs=1e-12)
        assert dp_optimal(seq, Objective.last_success()).optimal_value == pytest.approx(
            enumerated, abs=1e-12
        )
