"""k-fold multiplicative odds and the two "last m successes" rules.

R(j, k) sums, over all j-element subsets of the trailing indices {k..n}, the
products of their odds. Two classical objectives reduce to thresholds on
this table: predicting the m-th last success upon its arrival, and stopping
on any one of the last m successes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from ._exact import KNIFE_EDGE_BAND
from .errors import AssumptionError
from .odds import OddsSequence, ThresholdRule


@dataclass(frozen=True)
class MultiOddsTable:
    """Multiplicative odds R(j, k) for 0 <= j <= m, 1 <= k <= n+1.

    Satisfies R(0, k) = 1, R(j, n+1) = 0 for j >= 1, and the backward
    recurrence R(j, k) = R(j, k+1) + r_k * R(j-1, k+1). ``pi[k]`` counts the
    strictly positive odds at indices >= k.
    """

    n: int
    m: int
    _rows: tuple[tuple[float, ...], ...]
    _pi: tuple[int, ...]

    def value(self, j: int, k: int) -> float:
        if not 0 <= j <= self.m:
            raise ValueError(f"subset size {j} outside [0, {self.m}]")
        if not 1 <= k <= self.n + 1:
            raise ValueError(f"start index {k} outside [1, {self.n + 1}]")
        return self._rows[j][k - 1]

    def positive_count(self, k: int) -> int:
        """Number of indices j >= k with strictly positive odds."""
        if not 1 <= k <= self.n + 1:
            raise ValueError(f"start index {k} outside [1, {self.n + 1}]")
        return self._pi[k - 1]


def multi_odds(seq: OddsSequence, m: int) -> MultiOddsTable:
    """Fill the multiplicative odds table by the backward recurrence.

    Runs in O(n*m). Certain successes are rejected: an infinite odds entry
    has no finite multiplicative table, so callers must transform the model
    first.
    """
    n = seq.n
    if not 1 <= m <= n:
        raise ValueError(f"subset size m = {m} outside [1, {n}]")
    if seq.has_infinite_odds():
        raise AssumptionError(
            "multiplicative odds need all p_i < 1; transform certain successes first"
        )
    r = seq.odds
    rows = [[1.0] * (n + 1) for _ in range(m + 1)]
    for j in range(1, m + 1):
        rows[j][n] = 0.0  # R(j, n+1) = 0
        for k in range(n, 0, -1):
            rows[j][k - 1] = rows[j][k] + r[k - 1] * rows[j - 1][k]
    pi = [0] * (n + 1)
    for k in range(n, 0, -1):
        pi[k - 1] = pi[k] + (1 if r[k - 1] > 0.0 else 0)
    return MultiOddsTable(
        n=n, m=m, _rows=tuple(tuple(row) for row in rows), _pi=tuple(pi)
    )


def _exact_rows(seq: OddsSequence, m: int) -> list[list[Fraction]]:
    """Exact-rational multiplicative table, for boundary decisions."""
    n = seq.n
    r = seq.exact_odds
    if any(value is None for value in r):
        raise AssumptionError(
            "multiplicative odds need all p_i < 1; transform certain successes first"
        )
    rows = [[Fraction(1)] * (n + 1) for _ in range(m + 1)]
    for j in range(1, m + 1):
        rows[j][n] = Fraction(0)
        for k in range(n, 0, -1):
            rows[j][k - 1] = rows[j][k] + r[k - 1] * rows[j - 1][k]
    return rows


def mth_last_threshold(seq: OddsSequence, m: int) -> ThresholdRule:
    """Threshold for stopping exactly on the m-th last success.

    Stopping on a success at k wins with probability Q_{k+1} * R(m-1, k+1)
    (exactly m-1 more successes must follow), while deferring to the next
    success wins with probability Q_{k+1} * R(m, k+1) (each future m-subset
    is caught via its first element). The rule stops at the first index
    where stopping is at least as good:

        s_m = min{k >= 1 : R(m-1, k+1) >= R(m, k+1)}

    a one-stage look-ahead that backward induction confirms optimal (the
    stop region is upward closed). For m = 1 it reduces to the sum-the-odds
    threshold. Comparisons inside the knife-edge band are resolved exactly;
    with all-positive odds the result never exceeds n - m + 1, since beyond
    that point winning is impossible and R(m, k+1) collapses to 0.
    """
    table = multi_odds(seq, m)
    exact: list[list[Fraction]] | None = None
    for k in range(1, seq.n + 1):
        lhs = table.value(m - 1, k + 1)
        rhs = table.value(m, k + 1)
        scale = max(1.0, abs(rhs))
        if lhs - rhs > KNIFE_EDGE_BAND * scale:
            return ThresholdRule(k)
        if lhs - rhs >= -KNIFE_EDGE_BAND * scale:
            if exact is None:
                exact = _exact_rows(seq, m)
            if exact[m - 1][k] >= exact[m][k]:
                return ThresholdRule(k)
    return ThresholdRule(seq.n)


def last_m_threshold(seq: OddsSequence, m: int) -> ThresholdRule:
    """Threshold for stopping on any one of the last m successes.

    s_m is the smallest k whose strict tail satisfies R(m, k+1) <= 1. The
    comparison is inclusive, so on knife-edge instances (tail value exactly
    1) this window is one wider than the equally optimal alternative;
    comparisons inside the knife-edge band are resolved exactly.
    """
    table = multi_odds(seq, m)
    exact: list[list[Fraction]] | None = None
    for k in range(1, seq.n + 1):
        tail = table.value(m, k + 1)
        if tail < 1.0 - KNIFE_EDGE_BAND:
            return ThresholdRule(k)
        if tail <= 1.0 + KNIFE_EDGE_BAND:
            if exact is None:
                exact = _exact_rows(seq, m)
            if exact[m][k] <= 1:
                return ThresholdRule(k)
    raise AssertionError("unreachable: R(m, n+1) = 0 always satisfies the condition")


def last_m_value(seq: OddsSequence, m: int) -> float:
    """Win probability of the any-of-the-last-m threshold rule.

    Equals the probability of between 1 and m successes in the stopping
    window [s_m, n]: Q_{s_m} * sum_{j=1..m} R(j, s_m).
    """
    table = multi_odds(seq, m)
    s = last_m_threshold(seq, m).s
    q_window = 1.0
    for qv in seq.q[s - 1 :]:
        q_window *= qv
    return q_window * math.fsum(table.value(j, s) for j in range(1, m + 1))
