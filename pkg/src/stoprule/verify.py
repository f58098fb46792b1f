"""Ground-truth oracles: outcome enumeration and backward induction.

Everything here is deliberately independent of the closed-form modules: the
enumeration oracle sums over all 2^n outcome vectors, and the dynamic
programs recompute stop/continue values from trial probabilities alone.
These are the referees whenever a closed-form rule is in doubt.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import GuardError
from .markov import MarkovPolicy, MarkovSpec
from .odds import OddsSequence, StoppingPolicy

ENUM_MAX_N = 20
DP_MAX_N_LAST_SUCCESS = 25
DP_MAX_N_PARAMETERIZED = 15
DP_MAX_N_MARKOV = 25

LAST_SUCCESS = "last-success"
MTH_LAST = "mth-last"
ANY_OF_LAST_M = "any-of-last-m"
MULTI_SELECT = "multi-select"


@dataclass(frozen=True)
class Objective:
    """What counts as a win: which success the play must catch."""

    kind: str
    m: int = 1

    def __post_init__(self) -> None:
        if self.kind not in (LAST_SUCCESS, MTH_LAST, ANY_OF_LAST_M, MULTI_SELECT):
            raise ValueError(f"unknown objective kind {self.kind!r}")
        if self.m < 1:
            raise ValueError(f"objective parameter must be >= 1, got {self.m}")

    @classmethod
    def last_success(cls) -> Objective:
        return cls(LAST_SUCCESS)

    @classmethod
    def mth_last(cls, m: int) -> Objective:
        return cls(MTH_LAST, m)

    @classmethod
    def any_of_last_m(cls, m: int) -> Objective:
        return cls(ANY_OF_LAST_M, m)

    @classmethod
    def multi_select(cls, chances: int) -> Objective:
        return cls(MULTI_SELECT, chances)


@dataclass(frozen=True)
class OracleResult:
    optimal_value: float
    optimal_policy: StoppingPolicy | tuple[StoppingPolicy, ...] | MarkovPolicy


def _outcome_table(seq: OddsSequence) -> tuple[np.ndarray, np.ndarray]:
    """All 2^n outcome vectors with their probabilities."""
    n = seq.n
    codes = np.arange(1 << n, dtype=np.int64)
    bits = ((codes[:, None] >> np.arange(n)) & 1).astype(bool)
    p = np.asarray(seq.probs)
    weights = np.prod(np.where(bits, p, 1.0 - p), axis=1)
    return bits, weights


def enumerate_policy_value(
    seq: OddsSequence,
    policy: StoppingPolicy | Sequence[StoppingPolicy],
    objective: Objective,
) -> float:
    """Exact win probability of a deterministic policy, by enumeration."""
    n = seq.n
    if n > ENUM_MAX_N:
        raise GuardError(f"enumeration capped at n = {ENUM_MAX_N}, got {n}")
    bits, weights = _outcome_table(seq)
    if objective.kind == MULTI_SELECT:
        masks = _chance_masks(policy, n, objective.m)
        win_any, _ = _multi_select_wins(bits, masks)
        return float(np.dot(win_any, weights))
    if not isinstance(policy, StoppingPolicy):
        raise ValueError("single-stop objectives take a StoppingPolicy")
    if policy.n != n:
        raise ValueError(f"policy covers {policy.n} indices, model has {n}")
    mask = np.asarray(policy.stop)
    candidates = bits & mask
    stopped = candidates.any(axis=1)
    first = np.argmax(candidates, axis=1)
    tail_counts = np.cumsum(bits[:, ::-1], axis=1)[:, ::-1]
    at_stop = tail_counts[np.arange(len(bits)), first]
    if objective.kind == LAST_SUCCESS:
        wins = stopped & (at_stop == 1)
    elif objective.kind == MTH_LAST:
        wins = stopped & (at_stop == objective.m)
    else:  # ANY_OF_LAST_M
        wins = stopped & (at_stop <= objective.m)
    return float(np.dot(wins, weights))


def _chance_masks(
    policy: StoppingPolicy | Sequence[StoppingPolicy], n: int, chances: int
) -> np.ndarray:
    if isinstance(policy, StoppingPolicy):
        raise ValueError("multi-select needs one mask per chances-left level")
    masks = list(policy)
    if len(masks) != chances:
        raise ValueError(f"need {chances} chance masks, got {len(masks)}")
    for m in masks:
        if m.n != n:
            raise ValueError(f"mask covers {m.n} indices, model has {n}")
    return np.asarray([m.stop for m in masks])


def _multi_select_wins(bits: np.ndarray, masks: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Walk every outcome under the nested-selection play.

    Returns two win indicators: "some selected index is the last success"
    and "the final selection is the last success". The two coincide because
    no selection can happen after the last success; both are reported so
    tests can confirm the convention is unambiguous.
    """
    rows, n = bits.shape
    chances = len(masks)
    any_of = np.zeros(rows, dtype=bool)
    final = np.zeros(rows, dtype=bool)
    has_success = bits.any(axis=1)
    last_idx = np.where(has_success, n - 1 - np.argmax(bits[:, ::-1], axis=1), -1)
    left = np.full(rows, chances, dtype=np.int64)
    last_selection = np.full(rows, -1, dtype=np.int64)
    for j in range(n):
        can = (left > 0) & bits[:, j]
        # masks is indexed by chances-left-1
        sel = can & masks[np.clip(left, 1, chances) - 1, j]
        any_of |= sel & (last_idx == j)
        last_selection = np.where(sel, j, last_selection)
        left = left - sel
    final = (last_selection >= 0) & (last_selection == last_idx)
    return any_of, final


def multi_select_win_variants(
    seq: OddsSequence, policy: Sequence[StoppingPolicy]
) -> tuple[float, float]:
    """Win probability under both readings of the multi-chance win event."""
    n = seq.n
    if n > ENUM_MAX_N:
        raise GuardError(f"enumeration capped at n = {ENUM_MAX_N}, got {n}")
    bits, weights = _outcome_table(seq)
    masks = _chance_masks(policy, n, len(list(policy)))
    win_any, win_final = _multi_select_wins(bits, masks)
    return float(np.dot(win_any, weights)), float(np.dot(win_final, weights))


def _exact_tail_counts(seq: OddsSequence, top: int) -> list[list[float]]:
    """B[i][c] = P(exactly c successes among trials i..n), i = 1..n+1."""
    n = seq.n
    table = [[0.0] * (top + 1) for _ in range(n + 2)]
    table[n + 1][0] = 1.0
    for i in range(n, 0, -1):
        p, q = seq.probs[i - 1], seq.q[i - 1]
        nxt = table[i + 1]
        row = table[i]
        row[0] = q * nxt[0]
        for c in range(1, top + 1):
            row[c] = q * nxt[c] + p * nxt[c - 1]
    return table


def dp_optimal(seq: OddsSequence, objective: Objective) -> OracleResult:
    """Backward-induction optimum and an optimal policy."""
    n = seq.n
    if objective.kind == LAST_SUCCESS:
        cap = DP_MAX_N_LAST_SUCCESS
    else:
        cap = DP_MAX_N_PARAMETERIZED
    if n > cap:
        raise GuardError(f"{objective.kind} DP capped at n = {cap}, got {n}")
    if objective.kind == MULTI_SELECT:
        return _dp_multi_select(seq, objective.m)
    if objective.kind == LAST_SUCCESS:
        stop_values = [row[0] for row in _exact_tail_counts(seq, 0)]
        stop_of = lambda i: stop_values[i + 1]
    elif objective.kind == MTH_LAST:
        tails = _exact_tail_counts(seq, objective.m - 1)
        stop_of = lambda i: tails[i + 1][objective.m - 1]
    else:  # ANY_OF_LAST_M
        tails = _exact_tail_counts(seq, objective.m - 1)
        stop_of = lambda i: math.fsum(tails[i + 1])
    value_after = 0.0
    mask = [False] * n
    for i in range(n, 0, -1):
        stop_value = stop_of(i)
        # ties go to continuing: matches the larger-k threshold convention
        mask[i - 1] = stop_value > value_after
        p, q = seq.probs[i - 1], seq.q[i - 1]
        value_after = p * max(stop_value, value_after) + q * value_after
    policy = StoppingPolicy(mask)
    if (
        objective.kind == LAST_SUCCESS
        and all(r > 0.0 for r in seq.odds)
        and not seq.has_infinite_odds()
    ):
        first_stop = mask.index(True)
        if not all(mask[first_stop:]):
            raise AssertionError(
                "last-success optimum must be a terminal threshold window"
            )
    return OracleResult(optimal_value=value_after, optimal_policy=policy)


def _dp_multi_select(seq: OddsSequence, chances: int) -> OracleResult:
    n = seq.n
    no_more = [row[0] for row in _exact_tail_counts(seq, 0)]
    value = [[0.0] * (n + 2) for _ in range(chances + 1)]  # value[c][i]
    masks = [[False] * n for _ in range(chances)]
    for c in range(1, chances + 1):
        for i in range(n, 0, -1):
            select_value = no_more[i + 1] + value[c - 1][i + 1]
            masks[c - 1][i - 1] = select_value > value[c][i + 1]
            p, q = seq.probs[i - 1], seq.q[i - 1]
            value[c][i] = p * max(select_value, value[c][i + 1]) + q * value[c][i + 1]
    return OracleResult(
        optimal_value=value[chances][1],
        optimal_policy=tuple(StoppingPolicy(m) for m in masks),
    )


def decision_margins(seq: OddsSequence, objective: Objective) -> list[float]:
    """|stop - continue| at every decision state of the objective's DP.

    Instance generators use these to exclude knife-edge ties, where the
    ">=" versus ">" stop conventions legitimately pick different (equally
    optimal) policies.
    """
    n = seq.n
    if objective.kind == MULTI_SELECT:
        no_more = [row[0] for row in _exact_tail_counts(seq, 0)]
        value = [[0.0] * (n + 2) for _ in range(objective.m + 1)]
        margins = []
        for c in range(1, objective.m + 1):
            for i in range(n, 0, -1):
                select_value = no_more[i + 1] + value[c - 1][i + 1]
                margins.append(abs(select_value - value[c][i + 1]))
                p, q = seq.probs[i - 1], seq.q[i - 1]
                value[c][i] = (
                    p * max(select_value, value[c][i + 1]) + q * value[c][i + 1]
                )
        return margins
    if objective.kind == LAST_SUCCESS:
        tails = _exact_tail_counts(seq, 0)
        stop_of = lambda i: tails[i + 1][0]
    elif objective.kind == MTH_LAST:
        tails = _exact_tail_counts(seq, objective.m - 1)
        stop_of = lambda i: tails[i + 1][objective.m - 1]
    else:
        tails = _exact_tail_counts(seq, objective.m - 1)
        stop_of = lambda i: math.fsum(tails[i + 1])
    value_after = 0.0
    margins = []
    for i in range(n, 0, -1):
        stop_value = stop_of(i)
        margins.append(abs(stop_value - value_after))
        p, q = seq.probs[i - 1], seq.q[i - 1]
        value_after = p * max(stop_value, value_after) + q * value_after
    return margins


def markov_decision_margins(spec: MarkovSpec) -> list[float]:
    """|stop - continue| at the success states of the backward-chain DP."""
    no_new = [1.0] * (spec.N + 1)
    for j in range(2, spec.N + 1):
        no_new[j] = no_new[j - 1] * (1.0 - spec.alphas[j - 1])
    v1, v0 = 1.0, 0.0
    margins = []
    for j in range(1, spec.N + 1):
        a, b = spec.alphas[j], spec.betas[j]
        stop_value = b * no_new[j]
        continue_value = b * v0 + (1.0 - b) * v1
        margins.append(abs(stop_value - continue_value))
        v1, v0 = max(stop_value, continue_value), a * v1 + (1.0 - a) * v0
    return margins


def dp_optimal_markov(spec: MarkovSpec) -> OracleResult:
    """Backward induction over (index, state) for the backward chain.

    Stopping on a success at index j pays S_j (no further success); the
    induced stop mask recovers the "stop when S_j is at least the value of
    continuing" rule at success states. The mask never depends on rho.
    """
    if spec.N > DP_MAX_N_MARKOV:
        raise GuardError(f"Markov DP capped at N = {DP_MAX_N_MARKOV}, got {spec.N}")
    no_new = [1.0] * (spec.N + 1)
    for j in range(2, spec.N + 1):
        no_new[j] = no_new[j - 1] * (1.0 - spec.alphas[j - 1])
    v1, v0 = 1.0, 0.0  # values at index 0
    phi = [1] + [0] * spec.N
    for j in range(1, spec.N + 1):
        a, b = spec.alphas[j], spec.betas[j]
        stop_value = b * no_new[j]
        continue_value = b * v0 + (1.0 - b) * v1
        phi[j] = 1 if stop_value >= continue_value else 0
        v1, v0 = max(stop_value, continue_value), a * v1 + (1.0 - a) * v0
    return OracleResult(
        optimal_value=spec.rho * v1 + (1.0 - spec.rho) * v0,
        optimal_policy=MarkovPolicy(phi),
    )
