"""Exact-rational views of float inputs for knife-edge comparisons.

Threshold conditions in this package compare accumulated odds against exact
boundaries (1, or each other). Inputs like 1/6 are not representable in
binary floating point, so a purely float scan can land an instance that is
exactly on a boundary slightly to the wrong side. Decisions are therefore
made in two stages: plain float comparisons away from the boundary, and
exact rational arithmetic inside a narrow guard band around it.
"""

from __future__ import annotations

from fractions import Fraction

#: Half-width of the ambiguity zone around comparison boundaries. Float
#: accumulation error for the sums involved is orders of magnitude smaller,
#: so any value outside the band is decided correctly by floats alone.
KNIFE_EDGE_BAND = 1e-9

_MAX_DENOMINATOR = 10**9


def snap_fraction(x: float) -> Fraction:
    """Exact rational view of a float.

    Prefers the simplest rational that rounds to the same float (so the
    float image of 1/6 is treated as 1/6 exactly); falls back to the exact
    binary expansion for floats that are not images of simple rationals.
    """
    simple = Fraction(x).limit_denominator(_MAX_DENOMINATOR)
    return simple if float(simple) == x else Fraction(x)


def simple_fraction(x: float) -> Fraction | None:
    """The simple rational a float is the image of, or None."""
    simple = Fraction(x).limit_denominator(_MAX_DENOMINATOR)
    return simple if float(simple) == x else None
