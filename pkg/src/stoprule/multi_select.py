"""Multiple selection chances: nested thresholds from the H recursion.

With M chances to select, the optimal play arms chance m (counting chances
still in hand) from index i*^(m) on, and the thresholds nest:
i*^(M) <= ... <= i*^(1). A play wins when one of its selected indices turns
out to be the last success of the sequence; that win convention is not
spelled out by the sources, so it is fixed here and mirrored exactly by the
verification oracles.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ._exact import KNIFE_EDGE_BAND
from .errors import AssumptionError
from .odds import OddsSequence, StoppingPolicy


@dataclass(frozen=True)
class HTable:
    """H values and the nested selection thresholds extracted from them.

    H(i, 1) = 1 - sum of odds after i; H(i, m) adds the suffix sum of
    r_j * H(j, m-1) over j >= max(i+1, i*^(m-1)). Threshold i*^(m) is the
    first index where H(i, m) turns strictly positive.
    """

    n: int
    chances: int
    _rows: tuple[tuple[float, ...], ...]
    thresholds: tuple[int, ...]

    def value(self, i: int, m: int) -> float:
        if not 1 <= m <= self.chances:
            raise ValueError(f"chances level {m} outside [1, {self.chances}]")
        if not 1 <= i <= self.n:
            raise ValueError(f"index {i} outside [1, {self.n}]")
        return self._rows[m - 1][i - 1]


def h_table(seq: OddsSequence, chances: int) -> HTable:
    """Fill H and extract thresholds, in O(n * chances) via suffix sums.

    The "> 0" threshold tests are float comparisons away from zero; when any
    entry falls inside the knife-edge band around zero the whole table is
    rebuilt in exact rational arithmetic, so H values that are exactly zero
    do not arm a chance level one index early.
    """
    n = seq.n
    if chances < 1:
        raise ValueError(f"need at least one selection chance, got {chances}")
    if seq.has_infinite_odds():
        raise AssumptionError(
            "the H recursion needs all p_i < 1; transform certain successes first"
        )
    rows, thresholds, ambiguous = _build_rows(list(seq.odds), chances, 0.0)
    if ambiguous:
        exact_odds = list(seq.exact_odds)
        rows_exact, thresholds, _ = _build_rows(exact_odds, chances, Fraction(0))
        rows = [[float(h) for h in row] for row in rows_exact]
    for higher, lower in zip(thresholds, thresholds[1:]):
        if lower > higher:
            raise AssertionError(
                f"threshold nesting violated: {thresholds} is not non-increasing"
            )
    return HTable(
        n=n,
        chances=chances,
        _rows=tuple(tuple(row) for row in rows),
        thresholds=tuple(thresholds),
    )


def _build_rows(r, chances, zero):
    """Run the H recursion over either float or exact odds."""
    n = len(r)
    one = zero + 1
    ambiguous = False

    def first_positive(row) -> int:
        nonlocal ambiguous
        for i, h in enumerate(row, start=1):
            if isinstance(h, float) and abs(h) <= KNIFE_EDGE_BAND:
                ambiguous = True
            if h > zero:
                return i
        raise AssertionError("unreachable: H(n, m) = 1 is always positive")

    tail = zero
    h1 = [zero] * n
    for i in range(n, 0, -1):
        h1[i - 1] = one - tail
        tail = tail + r[i - 1]
    rows = [h1]
    thresholds = [first_positive(h1)]
    for _ in range(2, chances + 1):
        prev = rows[-1]
        prev_star = thresholds[-1]
        suffix = [zero] * (n + 2)  # suffix[j] = sum_{l >= j} r_l * prev[l]
        for j in range(n, 0, -1):
            suffix[j] = suffix[j + 1] + r[j - 1] * prev[j - 1]
        row = [h1[i - 1] + suffix[max(i + 1, prev_star)] for i in range(1, n + 1)]
        rows.append(row)
        thresholds.append(first_positive(row))
    return rows, thresholds, ambiguous


@dataclass(frozen=True)
class MultiSelectRule:
    """Nested-threshold selection rule.

    ``thresholds[m-1]`` arms the play when m chances remain: select the next
    success at an index >= that threshold.
    """

    n: int
    thresholds: tuple[int, ...]

    @property
    def chances(self) -> int:
        return len(self.thresholds)

    def selects(self, index: int, chances_left: int) -> bool:
        if chances_left < 1:
            return False
        level = min(chances_left, self.chances)
        return index >= self.thresholds[level - 1]

    def masks(self) -> tuple[StoppingPolicy, ...]:
        """Per-chances-left stop masks, index 0 holding the 1-chance mask."""
        return tuple(
            StoppingPolicy(i + 1 >= s for i in range(self.n))
            for s in self.thresholds
        )


def multi_select_rule(seq: OddsSequence, chances: int) -> MultiSelectRule:
    """Selection rule with up to ``chances`` picks, from the H thresholds."""
    table = h_table(seq, chances)
    return MultiSelectRule(n=seq.n, thresholds=table.thresholds)
