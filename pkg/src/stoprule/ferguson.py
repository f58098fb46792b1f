"""One-stage look-ahead stopping for processes with an absorbing state.

The model observes a process that is eventually absorbed in a terminal
state; the player wants to stop exactly one stage before absorption.
Stopping when absorption has already happened, or never stopping, pays a
consolation amount omega < 1. The one-stage look-ahead (1-sla) rule stops at
the first stage where the ratio of "exactly one more live stage" to "no more
live stages" drops to 1 - omega; when that ratio is non-increasing the rule
is optimal.

The Bernoulli specialization turns independent trials into this shape and
recovers the multiplicative-odds threshold for stopping on any of the last
m successes, giving an independent derivation path for cross-checking.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

from ._exact import KNIFE_EDGE_BAND, snap_fraction
from .errors import AssumptionError
from .odds import OddsSequence, ThresholdRule


@dataclass(frozen=True)
class SlaModel:
    """Stage data consumed by the 1-sla rule.

    ``v_seq[k-1]`` is the conditional probability that the process is dead
    after stage k; ``w_seq[k-1]`` that it stays alive for exactly one more
    success; ``absorbed[k-1]`` flags stages where absorption has already
    been observed. The horizon is the length of the sequences; for models
    without a natural end it acts as an explicit cap.
    """

    omega: float
    v_seq: tuple[float, ...]
    w_seq: tuple[float, ...]
    absorbed: tuple[bool, ...]

    def __init__(
        self,
        omega: float,
        v_seq: Sequence[float],
        w_seq: Sequence[float],
        absorbed: Sequence[bool] | None = None,
    ):
        object.__setattr__(self, "omega", float(omega))
        object.__setattr__(self, "v_seq", tuple(float(v) for v in v_seq))
        object.__setattr__(self, "w_seq", tuple(float(w) for w in w_seq))
        if absorbed is None:
            absorbed = [False] * len(self.v_seq)
        object.__setattr__(self, "absorbed", tuple(bool(a) for a in absorbed))
        if self.omega >= 1.0:
            raise ValueError(f"terminal reward must satisfy omega < 1, got {omega}")
        if not self.v_seq:
            raise ValueError("model needs at least one stage")
        if not len(self.v_seq) == len(self.w_seq) == len(self.absorbed):
            raise ValueError("stage sequences must have equal length")
        for name, values in (("V", self.v_seq), ("W", self.w_seq)):
            for k, x in enumerate(values, start=1):
                if not 0.0 <= x <= 1.0:
                    raise ValueError(f"{name}_{k} = {x} is not a probability in [0, 1]")

    @property
    def horizon(self) -> int:
        return len(self.v_seq)


class SlaStop(NamedTuple):
    stage: int
    stopped: bool


def one_sla_stop(model: SlaModel) -> SlaStop:
    """First stage where the 1-sla rule stops.

    Stops at the first absorbed stage, or at the first live stage k with
    W_k / V_k <= 1 - omega. When no stage qualifies, returns the horizon cap
    with ``stopped=False`` (the never-stopped play collects omega).
    """
    cutoff = 1.0 - model.omega
    for k in range(1, model.horizon + 1):
        if model.absorbed[k - 1]:
            return SlaStop(k, True)
        v = model.v_seq[k - 1]
        if v == 0.0:
            raise ValueError(f"V_{k} = 0: look-ahead ratio undefined at stage {k}")
        if model.w_seq[k - 1] / v <= cutoff:
            return SlaStop(k, True)
    return SlaStop(model.horizon, False)


def monotone_check(model: SlaModel) -> bool:
    """True when W_k / V_k is non-increasing over the live stages.

    Optimality of the 1-sla rule is only asserted under this condition.
    Live stages with V_k = 0 and W_k > 0 count as an infinite ratio.
    """
    previous = None
    for k in range(1, model.horizon + 1):
        if model.absorbed[k - 1]:
            continue
        v, w = model.v_seq[k - 1], model.w_seq[k - 1]
        if v == 0.0 and w == 0.0:
            continue
        ratio = float("inf") if v == 0.0 else w / v
        if previous is not None and ratio > previous:
            return False
        previous = ratio
    return True


def bernoulli_sla_model(seq: OddsSequence, m: int) -> SlaModel:
    """Independent-trials reduction: V_k = P(no success after stage k),
    W_k = P(exactly m successes after stage k), omega = 0, never absorbed."""
    n = seq.n
    if not 1 <= m <= n:
        raise ValueError(f"m = {m} outside [1, {n}]")
    if seq.has_infinite_odds():
        raise AssumptionError(
            "the Bernoulli reduction needs all p_i < 1; transform certain successes first"
        )
    # tail[c] = P(exactly c successes among trials k+1..n), maintained backward
    tail = [0.0] * (m + 1)
    tail[0] = 1.0
    v_rev: list[float] = []
    w_rev: list[float] = []
    for k in range(n, 0, -1):
        v_rev.append(tail[0])
        w_rev.append(tail[m])
        p, q = seq.probs[k - 1], seq.q[k - 1]
        for c in range(m, 0, -1):
            tail[c] = q * tail[c] + p * tail[c - 1]
        tail[0] = q * tail[0]
    return SlaModel(omega=0.0, v_seq=v_rev[::-1], w_seq=w_rev[::-1])


def _exact_ratios(seq: OddsSequence, m: int) -> list[Fraction]:
    """Exact W_k/V_k for the Bernoulli reduction, k = 1..n."""
    n = seq.n
    probs = [snap_fraction(p) for p in seq.probs]
    tail = [Fraction(0)] * (m + 1)
    tail[0] = Fraction(1)
    ratios_rev: list[Fraction] = []
    for k in range(n, 0, -1):
        ratios_rev.append(tail[m] / tail[0])
        p = probs[k - 1]
        q = 1 - p
        for c in range(m, 0, -1):
            tail[c] = q * tail[c] + p * tail[c - 1]
        tail[0] = q * tail[0]
    return ratios_rev[::-1]


def bernoulli_sla(seq: OddsSequence, m: int) -> ThresholdRule:
    """1-sla threshold for catching one of the last m successes.

    Builds the stage sequences from the trial probabilities directly (no
    odds table), applies the 1-sla condition with omega = 0, and returns
    the first qualifying stage as a threshold. Ratio comparisons inside the
    knife-edge band around 1 are resolved exactly, keeping this derivation
    path in exact index agreement with the multiplicative-odds route.
    """
    model = bernoulli_sla_model(seq, m)
    exact: list[Fraction] | None = None
    for k in range(1, model.horizon + 1):
        v = model.v_seq[k - 1]
        if v == 0.0:
            raise ValueError(f"V_{k} = 0: look-ahead ratio undefined at stage {k}")
        ratio = model.w_seq[k - 1] / v
        if ratio < 1.0 - KNIFE_EDGE_BAND:
            return ThresholdRule(k)
        if ratio <= 1.0 + KNIFE_EDGE_BAND:
            if exact is None:
                exact = _exact_ratios(seq, m)
            if exact[k - 1] <= 1:
                return ThresholdRule(k)
    raise AssertionError("unreachable: W_n = 0 always stops the Bernoulli reduction")
