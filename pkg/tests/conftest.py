"""Shared instance generators.

Optimality-equality tests need instances away from knife edges, where the
">=" vs ">" stop conventions legitimately pick different (equally optimal)
policies. Generators therefore reject any instance whose defining sums sit
within 1e-9 of their comparison boundary or whose DP stop/continue margins
fall below 1e-9; dedicated tie-invariance tests cover the excluded edge.
"""

from __future__ import annotations

import numpy as np
import pytest

from stoprule import OddsSequence
from stoprule.verify import Objective, decision_margins

TIE_GUARD = 1e-9


def is_knife_edge(seq: OddsSequence, objectives: tuple[Objective, ...]) -> bool:
    tail = 0.0
    for r in reversed(seq.odds):
        tail += r
        if abs(tail - 1.0) < TIE_GUARD:
            return True
    for objective in objectives:
        for margin in decision_margins(seq, objective):
            # margins of exactly zero are structural (both actions worthless
            # at terminal states) and cannot shift a policy's value
            if 0.0 < margin < TIE_GUARD:
                return True
    return False


def random_sequence(
    rng: np.random.Generator,
    n: int,
    objectives: tuple[Objective, ...] = (Objective.last_success(),),
    lo: float = 0.02,
    hi: float = 0.95,
) -> OddsSequence:
    """A non-knife-edge instance for the given objectives."""
    for _ in range(200):
        seq = OddsSequence(rng.uniform(lo, hi, n))
        if not is_knife_edge(seq, objectives):
            return seq
    raise RuntimeError("could not draw a non-knife-edge instance")


def tied_sequence(rng: np.random.Generator, window: int, lead: int) -> tuple[OddsSequence, int]:
    """Instance whose trailing `window` odds sum to 1 up to float rounding.

    Returns (sequence, s) where s is the start of the tied window. Equal
    per-index probability 1/(window+1) makes each trailing odds 1/window.
    """
    p_tail = 1.0 / (window + 1)
    probs = list(rng.uniform(0.02, 0.3, lead)) + [p_tail] * window
    return OddsSequence(probs), lead + 1


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
