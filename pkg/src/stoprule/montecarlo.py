"""Reproducible Monte Carlo evaluation of stopping policies.

Trials are generated in fixed-size chunks; chunk c draws from a generator
seeded by SeedSequence(seed, spawn_key=(c,)), and every trial's randomness
is a fixed row of its chunk's draw matrices. Results are therefore a pure
function of (seed, trial index): worker counts and scheduling cannot change
a single bit of the report. Aggregation is integer win counting, which is
order-independent.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Protocol, Sequence, runtime_checkable

import numpy as np

from .markov import MarkovPolicy, MarkovSpec
from .multi_select import MultiSelectRule
from .odds import OddsSequence, StoppingPolicy, threshold
from .verify import ANY_OF_LAST_M, LAST_SUCCESS, MTH_LAST, MULTI_SELECT, Objective

CHUNK_TRIALS = 4096
_Z95 = 1.959963984540054


def wilson_interval(successes: int, trials: int, z: float = _Z95) -> tuple[float, float]:
    """Score-method confidence interval; well-behaved near 0 and 1."""
    if trials < 1:
        raise ValueError("need at least one trial")
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1.0 - phat) / trials + z * z / (4 * trials * trials)) / denom
    # rounding can push an endpoint a few ulp past the MLE at 0 or 1
    lo = min(max(0.0, center - half), phat)
    hi = max(min(1.0, center + half), phat)
    return (lo, hi)


@dataclass(frozen=True)
class SimulationReport:
    estimate: float
    stderr: float
    ci95: tuple[float, float]
    trials: int
    seed: int

    def __post_init__(self) -> None:
        lo, hi = self.ci95
        if not lo <= self.estimate <= hi:
            raise ValueError("confidence interval must contain the estimate")


def report_from_wins(wins: int, trials: int, seed: int) -> SimulationReport:
    estimate = wins / trials
    return SimulationReport(
        estimate=estimate,
        stderr=math.sqrt(estimate * (1.0 - estimate) / trials),
        ci95=wilson_interval(wins, trials),
        trials=trials,
        seed=seed,
    )


@runtime_checkable
class AdaptivePolicy(Protocol):
    """Online decision procedure: may only look at observations up to k."""

    def decide(self, index: int, history: Sequence[int]) -> bool:
        """Stop on the success at ``index`` given outcomes 1..index?"""
        ...


class EmpiricalOddsPolicy:
    """Plug-in rule for unknown constant success probability.

    Before deciding at index k it smooths the observed frequency to
    p_hat = (1 + successes before k) / ((k - 1) + 2) (so the very first
    decision uses the prior 1/2), recomputes the sum-the-odds threshold for
    a constant-p_hat model over the remaining horizon, and stops when that
    threshold says the stopping window has already begun.
    """

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("horizon must be >= 1")
        self.n = n
        self._cache: dict[tuple[int, int], bool] = {}

    def decide(self, index: int, history: Sequence[int]) -> bool:
        if not 1 <= index <= self.n:
            raise ValueError(f"index {index} outside horizon {self.n}")
        seen = sum(1 for x in history[: index - 1] if x)
        key = (index, seen)
        cached = self._cache.get(key)
        if cached is None:
            p_hat = (1 + seen) / ((index - 1) + 2)
            remaining = self.n - index + 1
            cached = threshold(OddsSequence([p_hat] * remaining)).s == 1
            self._cache[key] = cached
        return cached


def chunk_sizes(trials: int) -> list[int]:
    full, rem = divmod(trials, CHUNK_TRIALS)
    return [CHUNK_TRIALS] * full + ([rem] if rem else [])


def chunk_rng(seed: int, chunk_index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(chunk_index,))
    return np.random.Generator(np.random.PCG64(ss))


def _bernoulli_outcomes(probs: np.ndarray, rng: np.random.Generator, rows: int) -> np.ndarray:
    return rng.random((rows, probs.size)) < probs


def _markov_states(spec: MarkovSpec, rng: np.random.Generator, rows: int) -> np.ndarray:
    """Chain states as a (rows, N+1) matrix, column j = backward index j."""
    u = rng.random((rows, spec.N + 1))
    states = np.zeros((rows, spec.N + 1), dtype=bool)
    states[:, spec.N] = u[:, spec.N] < spec.rho
    for j in range(spec.N, 0, -1):
        cur = states[:, j]
        a, b = spec.alphas[j], spec.betas[j]
        states[:, j - 1] = np.where(cur, u[:, j - 1] < 1.0 - b, u[:, j - 1] < a)
    return states


def _wins_mask(outcomes: np.ndarray, mask: np.ndarray, objective: Objective) -> np.ndarray:
    rows = outcomes.shape[0]
    candidates = outcomes & mask
    stopped = candidates.any(axis=1)
    first = np.argmax(candidates, axis=1)
    tail = np.cumsum(outcomes[:, ::-1], axis=1)[:, ::-1]
    at_stop = tail[np.arange(rows), first]
    if objective.kind == LAST_SUCCESS:
        return stopped & (at_stop == 1)
    if objective.kind == MTH_LAST:
        return stopped & (at_stop == objective.m)
    if objective.kind == ANY_OF_LAST_M:
        return stopped & (at_stop <= objective.m)
    raise ValueError(f"mask policies cannot play objective {objective.kind!r}")


def _wins_multi_select(outcomes: np.ndarray, masks: np.ndarray) -> np.ndarray:
    rows, n = outcomes.shape
    chances = len(masks)
    has_success = outcomes.any(axis=1)
    last = np.where(has_success, n - 1 - np.argmax(outcomes[:, ::-1], axis=1), -1)
    left = np.full(rows, chances, dtype=np.int64)
    wins = np.zeros(rows, dtype=bool)
    for j in range(n):
        can = (left > 0) & outcomes[:, j]
        sel = can & masks[np.clip(left, 1, chances) - 1, j]
        wins |= sel & (last == j)
        left = left - sel
    return wins


def _wins_markov(states: np.ndarray, policy: MarkovPolicy) -> np.ndarray:
    rows, width = states.shape
    phi = np.asarray(policy.phi, dtype=bool)
    stops = states & phi
    any_stop = stops.any(axis=1)
    # observation order is backward index N..0: the first stop is the largest j
    first_stop = width - 1 - np.argmax(stops[:, ::-1], axis=1)
    below = np.cumsum(states, axis=1) - states
    win = any_stop & (below[np.arange(rows), first_stop] == 0)
    return win


def _wins_adaptive(
    outcomes: np.ndarray, policy: AdaptivePolicy, objective: Objective
) -> np.ndarray:
    rows, n = outcomes.shape
    tail = np.cumsum(outcomes[:, ::-1], axis=1)[:, ::-1]
    wins = np.zeros(rows, dtype=bool)
    for row in range(rows):
        history = outcomes[row]
        for k in range(1, n + 1):
            if history[k - 1] and policy.decide(k, history[:k]):
                at_stop = tail[row, k - 1]
                if objective.kind == LAST_SUCCESS:
                    wins[row] = at_stop == 1
                elif objective.kind == MTH_LAST:
                    wins[row] = at_stop == objective.m
                elif objective.kind == ANY_OF_LAST_M:
                    wins[row] = at_stop <= objective.m
                break
    return wins


def _normalize_policy(policy, model, objective: Objective):
    """Return (kind, payload) for the chunk evaluator."""
    if isinstance(model, MarkovSpec):
        if not isinstance(policy, MarkovPolicy):
            raise ValueError("Markov models take a MarkovPolicy")
        if policy.N != model.N:
            raise ValueError(
                f"policy horizon {policy.N} does not match chain horizon {model.N}"
            )
        if objective.kind != LAST_SUCCESS:
            raise ValueError("Markov simulation supports the last-success objective")
        return ("markov", policy)
    if not isinstance(model, OddsSequence):
        raise ValueError(f"unsupported model type {type(model).__name__}")
    if objective.kind == MULTI_SELECT:
        if isinstance(policy, MultiSelectRule):
            masks = policy.masks()
        else:
            masks = tuple(policy)
        if len(masks) != objective.m:
            raise ValueError(f"need {objective.m} chance masks, got {len(masks)}")
        for mask in masks:
            if mask.n != model.n:
                raise ValueError(f"mask covers {mask.n} indices, model has {model.n}")
        return ("multi", np.asarray([m.stop for m in masks]))
    if isinstance(policy, StoppingPolicy):
        if policy.n != model.n:
            raise ValueError(
                f"policy covers {policy.n} indices, model has {model.n}"
            )
        return ("mask", np.asarray(policy.stop))
    if isinstance(policy, AdaptivePolicy):
        return ("adaptive", policy)
    raise ValueError(f"unsupported policy type {type(policy).__name__}")


def compare(
    policies: Sequence,
    model,
    objective: Objective | None = None,
    trials: int = 100_000,
    seed: int = 0,
    workers: int = 1,
) -> list[SimulationReport]:
    """Evaluate several policies on shared trial streams.

    All policies see identical outcome draws (common random numbers), which
    removes most of the noise from their comparison. Reports come back in
    input order.
    """
    objective = objective or Objective.last_success()
    if trials < 1:
        raise ValueError("need at least one trial")
    if seed < 0:
        raise ValueError("seed must be a non-negative integer")
    normalized = [_normalize_policy(p, model, objective) for p in policies]
    sizes = chunk_sizes(trials)

    if isinstance(model, OddsSequence):
        probs = np.asarray(model.probs)
        draw = lambda rng, rows: _bernoulli_outcomes(probs, rng, rows)
    else:
        draw = lambda rng, rows: _markov_states(model, rng, rows)

    def eval_chunk(chunk_index: int) -> list[int]:
        rng = chunk_rng(seed, chunk_index)
        table = draw(rng, sizes[chunk_index])
        counts = []
        for kind, payload in normalized:
            if kind == "mask":
                wins = _wins_mask(table, payload, objective)
            elif kind == "multi":
                wins = _wins_multi_select(table, payload)
            elif kind == "markov":
                wins = _wins_markov(table, payload)
            else:
                wins = _wins_adaptive(table, payload, objective)
            counts.append(int(wins.sum()))
        return counts

    if workers <= 1:
        per_chunk = [eval_chunk(c) for c in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_chunk = list(pool.map(eval_chunk, range(len(sizes))))
    totals = [sum(counts[i] for counts in per_chunk) for i in range(len(policies))]
    return [report_from_wins(w, trials, seed) for w in totals]


def simulate(
    model,
    policy,
    objective: Objective | None = None,
    trials: int = 100_000,
    seed: int = 0,
    workers: int = 1,
) -> SimulationReport:
    """Binomial estimate of a single policy's win probability."""
    return compare([policy], model, objective, trials, seed, workers)[0]


def empirical_odds_policy(n: int) -> EmpiricalOddsPolicy:
    """Adaptive plug-in policy for an unknown common success probability."""
    return EmpiricalOddsPolicy(n)
