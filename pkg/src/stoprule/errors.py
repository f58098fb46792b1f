"""Exception types shared across the package.

Plain ``ValueError`` is used for malformed input (bad probabilities, length
mismatches, schema violations). The types below mark conditions a caller may
want to handle separately: model assumptions that do not hold, and size
guards on the exhaustive oracles.
"""

from __future__ import annotations


class StopruleError(Exception):
    """Base class for package-specific errors."""


class AssumptionError(StopruleError):
    """A model assumption required by a closed-form rule does not hold.

    Raised instead of silently computing with a formula outside its stated
    regime (e.g. Markov transition constraints, monotonicity/concavity
    requirements, or unsupported parameter combinations).
    """


class GuardError(StopruleError):
    """An exhaustive oracle was asked to exceed its hard size cap."""
