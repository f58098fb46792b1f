"""Odds representation and the sum-the-odds threshold rule.

A play observes independent indicators I_1..I_n with known success
probabilities and must stop, online and without recall, on the last success.
The optimal rule is a threshold rule: scan the odds r_i = p_i/(1-p_i)
backwards, stop accumulating at the first index s where the running sum
reaches 1, then stop the play on the first success at index >= s. The win
probability of that rule is the probability of exactly one success in the
window [s, n].

Builders at the bottom of the module produce the standard model instances
(secretary/record indicators, repeated dice throws, availability-thinned and
time-embedded sequences, grouped interviews).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

from ._exact import KNIFE_EDGE_BAND, snap_fraction

ONE_OVER_E = math.exp(-1.0)

#: Explicit marker for the odds of a certain success (p = 1).
INFINITE_ODDS = math.inf


@dataclass(frozen=True)
class OddsSequence:
    """Success probabilities p_1..p_n with derived failure probs and odds.

    Certain successes (p = 1) are legal; their odds are represented by the
    explicit :data:`INFINITE_ODDS` marker, never by a large finite number.
    """

    probs: tuple[float, ...]

    def __init__(self, probs: Iterable[float]):
        object.__setattr__(self, "probs", tuple(float(p) for p in probs))
        if self.n < 1:
            raise ValueError("odds sequence needs at least one probability")
        for i, p in enumerate(self.probs, start=1):
            if not (0.0 <= p <= 1.0) or math.isnan(p):
                raise ValueError(f"p_{i} = {p} is not a probability in [0, 1]")

    @property
    def n(self) -> int:
        return len(self.probs)

    @cached_property
    def q(self) -> tuple[float, ...]:
        """Failure probabilities q_i = 1 - p_i."""
        return tuple(1.0 - p for p in self.probs)

    @cached_property
    def odds(self) -> tuple[float, ...]:
        """Odds r_i = p_i/q_i, with INFINITE_ODDS where p_i = 1."""
        return tuple(
            INFINITE_ODDS if q == 0.0 else p / q for p, q in zip(self.probs, self.q)
        )

    @cached_property
    def exact_odds(self) -> tuple[Fraction | None, ...]:
        """Exact rational odds (None marking infinite), for boundary decisions."""
        out: list[Fraction | None] = []
        for p in self.probs:
            frac = snap_fraction(p)
            out.append(None if frac == 1 else frac / (1 - frac))
        return tuple(out)

    def has_infinite_odds(self) -> bool:
        return any(math.isinf(r) for r in self.odds)


@dataclass(frozen=True)
class ThresholdRule:
    """Stop on the first success at index >= s; reaching n without one loses."""

    s: int

    def __post_init__(self) -> None:
        if self.s < 1:
            raise ValueError(f"threshold index must be >= 1, got {self.s}")


@dataclass(frozen=True)
class StoppingPolicy:
    """Per-index stop/continue mask over 1..n.

    ``stop[i-1]`` is True when the policy stops on a success at index i.
    General masks allow non-contiguous stopping islands; threshold rules are
    the special case produced by :meth:`from_threshold`.
    """

    stop: tuple[bool, ...]

    def __init__(self, stop: Iterable[bool]):
        object.__setattr__(self, "stop", tuple(bool(b) for b in stop))
        if not self.stop:
            raise ValueError("policy mask must cover at least one index")

    @property
    def n(self) -> int:
        return len(self.stop)

    @classmethod
    def from_threshold(cls, rule: ThresholdRule | int, n: int) -> StoppingPolicy:
        s = rule.s if isinstance(rule, ThresholdRule) else int(rule)
        if not 1 <= s <= n + 1:
            raise ValueError(f"threshold {s} outside horizon {n}")
        return cls(i + 1 >= s for i in range(n))

    def stops_at(self, index: int) -> bool:
        return self.stop[index - 1]


def threshold(seq: OddsSequence) -> ThresholdRule:
    """Sum-the-odds threshold: one backward pass, stopping early.

    Returns the largest s with r_s + ... + r_n >= 1, or s = 1 when the full
    sum stays below 1. The float scan inspects each odds value once; when
    the running sum enters the guard band around 1 the comparison switches
    to exact rational arithmetic, so instances whose trailing odds total
    exactly 1 keep the larger threshold the ">=" convention prescribes.
    """
    running = 0.0
    exact_running: Fraction | None = None
    for k in range(seq.n, 0, -1):
        r = seq.odds[k - 1]
        if math.isinf(r):
            return ThresholdRule(k)
        running += r
        if exact_running is not None:
            exact_value = seq.exact_odds[k - 1]
            if exact_value is None:
                return ThresholdRule(k)
            exact_running += exact_value
            if exact_running >= 1:
                return ThresholdRule(k)
        elif running >= 1.0 + KNIFE_EDGE_BAND:
            return ThresholdRule(k)
        elif running >= 1.0 - KNIFE_EDGE_BAND:
            tail = seq.exact_odds[k - 1 :]
            if any(value is None for value in tail):
                return ThresholdRule(k)
            exact_running = sum(tail, Fraction(0))
            if exact_running >= 1:
                return ThresholdRule(k)
    return ThresholdRule(1)


def win_probability(seq: OddsSequence, rule: ThresholdRule) -> float:
    """Probability that the threshold rule stops on the last success.

    Computed as the probability of exactly one success in the window [s, n]
    via prefix/suffix failure products. That form stays finite when the
    window contains certain successes, unlike the equivalent product
    R_s * Q_s of summed odds and no-success probability.
    """
    s = rule.s
    if not 1 <= s <= seq.n:
        raise ValueError(f"threshold {s} outside horizon {seq.n}")
    p = seq.probs[s - 1 :]
    q = seq.q[s - 1 :]
    w = len(p)
    pre = [1.0] * (w + 1)
    for i in range(w):
        pre[i + 1] = pre[i] * q[i]
    suf = [1.0] * (w + 1)
    for i in range(w - 1, -1, -1):
        suf[i] = q[i] * suf[i + 1]
    return math.fsum(p[j] * pre[j] * suf[j + 1] for j in range(w))


class OneOverECheck(NamedTuple):
    applicable: bool
    margin: float | None


def one_over_e_check(seq: OddsSequence) -> OneOverECheck:
    """Check the 1/e lower bound on the optimal win probability.

    Applicable when the odds sum to at least 1; then the optimal value is
    guaranteed to be >= 1/e and the (non-negative) margin is returned.
    A negative margin would indicate an implementation bug, not bad data.
    """
    total = math.fsum(seq.odds)
    if total < 1.0 - KNIFE_EDGE_BAND:
        return OneOverECheck(False, None)
    if total < 1.0 + KNIFE_EDGE_BAND and not math.isinf(total):
        if any(v is None for v in seq.exact_odds):
            pass  # an infinite odds entry settles the gate
        elif sum(seq.exact_odds, Fraction(0)) < 1:
            return OneOverECheck(False, None)
    value = win_probability(seq, threshold(seq))
    margin = value - ONE_OVER_E
    if margin < -1e-12:
        raise AssertionError(
            f"1/e bound violated: V = {value!r} with odds sum {total!r}"
        )
    return OneOverECheck(True, margin)


def secretary(n: int) -> OddsSequence:
    """Record-indicator sequence p_k = 1/k (classical best-choice problem)."""
    if n < 1:
        raise ValueError("horizon must be >= 1")
    return OddsSequence(1.0 / k for k in range(1, n + 1))


def dice(n: int, faces: int = 6) -> OddsSequence:
    """Constant sequence p = 1/faces for n throws of a fair die."""
    if n < 1:
        raise ValueError("horizon must be >= 1")
    if faces < 2:
        raise ValueError("die needs at least 2 faces")
    return OddsSequence([1.0 / faces] * n)


def with_availability(seq: OddsSequence, avail: Sequence[float]) -> OddsSequence:
    """Thin each success by an independent availability probability a_k."""
    if len(avail) != seq.n:
        raise ValueError(f"expected {seq.n} availability entries, got {len(avail)}")
    for i, a in enumerate(avail, start=1):
        if not 0.0 <= float(a) <= 1.0:
            raise ValueError(f"a_{i} = {a} is not a probability in [0, 1]")
    return OddsSequence(p * float(a) for p, a in zip(seq.probs, avail))


def time_embedded(
    cond_probs: Sequence[float], presence_probs: Sequence[float]
) -> OddsSequence:
    """Embed a random number of observations into a fixed grid of times.

    p_k = P(success at slot k | an observation occurs) * P(an observation
    occurs at slot k); the product is again an independent-indicator model.
    """
    if len(cond_probs) != len(presence_probs):
        raise ValueError(
            f"length mismatch: {len(cond_probs)} conditional vs "
            f"{len(presence_probs)} presence probabilities"
        )
    for name, values in (("cond", cond_probs), ("presence", presence_probs)):
        for i, x in enumerate(values, start=1):
            if not 0.0 <= float(x) <= 1.0:
                raise ValueError(f"{name}_{i} = {x} is not a probability in [0, 1]")
    return OddsSequence(float(c) * float(m) for c, m in zip(cond_probs, presence_probs))


def grouped(group_sizes: Sequence[int]) -> OddsSequence:
    """Group-interview reduction: one indicator per group.

    Group j (with cumulative count c_j) is a success when the best of the
    first c_j observations falls inside it, which happens with probability
    (c_j - c_{j-1}) / c_j under exchangeable ranks. Singleton groups recover
    the secretary sequence.
    """
    if not group_sizes:
        raise ValueError("need at least one group")
    probs = []
    cumulative = 0
    for j, size in enumerate(group_sizes, start=1):
        if int(size) != size or size < 1:
            raise ValueError(f"group {j} size must be a positive integer, got {size}")
        cumulative += int(size)
        probs.append(size / cumulative)
    return OddsSequence(probs)
