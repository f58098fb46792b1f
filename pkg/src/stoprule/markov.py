"""Threshold policies for Markov-dependent indicators.

Two chain conventions appear in this problem family and both are kept:

* Backward chains (:class:`MarkovSpec`): states I_N, I_{N-1}, ..., I_0 are
  observed in decreasing index order. Transition n -> n-1 is parameterized
  by alpha_n = P(next = 1 | current = 0) and beta_n = P(next = 0 | current
  = 1). Stopping on a success at index j wins when every remaining state is
  0, which has probability S_j = beta_j * prod_{i<j} (1 - alpha_i).

* Forward chains (:class:`TamakiSpec`): states I_1..I_n observed in
  increasing order, with alpha_j, beta_j describing the j -> j+1 transition
  and fixed formal boundary entries alpha_n = 0, beta_n = 1.

The closed-form policies implement their printed parameter regimes exactly
and refuse anything outside them; the dynamic-programming oracle is the
referee for all of them.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import AssumptionError
from .odds import OddsSequence, ThresholdRule

_INTEGER_GUARD = 1e-12


@dataclass(frozen=True)
class MarkovSpec:
    """Backward-indexed two-state chain over indices N..0.

    ``alphas[n]``/``betas[n]`` parameterize the transition out of index n
    for n = 1..N. The index-0 entries never drive the chain; they only feed
    the non-homogeneous threshold formula, which references them. ``rho``
    is the success probability of the first observed state I_N; the chain
    definition leaves it open, the policies do not depend on it, and the
    evaluators need it, so it is an explicit parameter with default 1/2.
    """

    N: int
    alphas: tuple[float, ...]
    betas: tuple[float, ...]
    rho: float = 0.5

    def __post_init__(self) -> None:
        if self.N < 0:
            raise ValueError("horizon N must be >= 0")
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        if len(self.alphas) != self.N + 1 or len(self.betas) != self.N + 1:
            raise ValueError(
                f"need {self.N + 1} alpha/beta entries (indices 0..N), got "
                f"{len(self.alphas)}/{len(self.betas)}"
            )
        for name, values in (("alpha", self.alphas), ("beta", self.betas)):
            for n, x in enumerate(values):
                if not 0.0 <= x <= 1.0:
                    raise ValueError(f"{name}_{n} = {x} is not a probability in [0, 1]")
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError(f"rho = {self.rho} is not a probability in [0, 1]")

    @classmethod
    def homogeneous(
        cls, alpha: float, beta: float, N: int, rho: float = 0.5
    ) -> MarkovSpec:
        return cls(
            N=N, alphas=(alpha,) * (N + 1), betas=(beta,) * (N + 1), rho=rho
        )


@dataclass(frozen=True)
class MarkovPolicy:
    """Stop mask over backward indices 0..N; phi[0] = 1 always.

    ``phi[j] = 1`` stops on a success at index j; islands of consecutive
    ones need not be contiguous.
    """

    phi: tuple[int, ...]

    def __init__(self, phi: Iterable[int]):
        object.__setattr__(self, "phi", tuple(int(bool(x)) for x in phi))
        if not self.phi:
            raise ValueError("policy must cover index 0")
        if self.phi[0] != 1:
            raise ValueError("a decision is forced at index 0: phi[0] must be 1")

    @property
    def N(self) -> int:
        return len(self.phi) - 1

    def islands(self) -> list[tuple[int, int]]:
        """Maximal runs of stopping indices, as (low, high) backward pairs."""
        runs: list[tuple[int, int]] = []
        j = 0
        while j <= self.N:
            if self.phi[j]:
                low = j
                while j + 1 <= self.N and self.phi[j + 1]:
                    j += 1
                runs.append((low, j))
            j += 1
        return runs


def stop_success_prob(spec: MarkovSpec, j: int) -> float:
    """P(no further success | success observed at backward index j)."""
    if not 0 <= j <= spec.N:
        raise ValueError(f"index {j} outside [0, {spec.N}]")
    if j == 0:
        return 1.0
    out = spec.betas[j]
    for i in range(1, j):
        out *= 1.0 - spec.alphas[i]
    return out


def markov_policy_value(spec: MarkovSpec, policy: MarkovPolicy) -> float:
    """Exact probability that a fixed policy stops on the last success.

    One forward pass over (index, state) reach probabilities; linear in N.
    """
    if policy.N != spec.N:
        raise ValueError(
            f"policy horizon {policy.N} does not match chain horizon {spec.N}"
        )
    no_new = [1.0] * (spec.N + 1)  # no_new[j] = prod_{1 <= i < j} (1 - alpha_i)
    for j in range(2, spec.N + 1):
        no_new[j] = no_new[j - 1] * (1.0 - spec.alphas[j - 1])
    reach1, reach0 = spec.rho, 1.0 - spec.rho
    win = 0.0
    for j in range(spec.N, 0, -1):
        if policy.phi[j]:
            win += reach1 * spec.betas[j] * no_new[j]
            reach1 = 0.0
        a, b = spec.alphas[j], spec.betas[j]
        reach1, reach0 = reach1 * (1.0 - b) + reach0 * a, reach1 * b + reach0 * (1.0 - a)
    return win + reach1  # stopping at index 0 on a success always wins


def _exact_pair(alpha: float, beta: float) -> tuple[Fraction, Fraction] | None:
    """Snap both parameters to simple rationals when they are float images."""
    pair = []
    for x in (alpha, beta):
        frac = Fraction(x).limit_denominator(10**9)
        if float(frac) != x:
            return None
        pair.append(frac)
    return pair[0], pair[1]


def _guarded_floor(x: float) -> int:
    """Floor with a 1e-12 band around integers (float path only)."""
    nearest = round(x)
    floored = math.floor(x)
    if nearest != floored and abs(x - nearest) < _INTEGER_GUARD:
        warnings.warn(
            f"floor argument {x!r} lies within {_INTEGER_GUARD} of an integer; "
            f"snapping to {nearest}",
            stacklevel=3,
        )
        return int(nearest)
    return int(floored)


def _floor(x: float | Fraction) -> int:
    if isinstance(x, Fraction):
        return math.floor(x)
    return _guarded_floor(x)


def hy_homogeneous_policy(alpha: float, beta: float, N: int) -> MarkovPolicy:
    """Optimal stop mask for the constant-transition backward chain.

    Implements every printed parameter regime: for beta >= 1/2 a single
    terminal stopping island ending at a floor-formula index, and for
    0 < beta < 1/2 the three cases driven by where the crossing quantity
    (alpha+beta)*beta*(1-alpha)^n - beta*(1-alpha-beta)^(n+1) first reaches
    alpha, which may produce two stopping islands. Parameter combinations
    outside the printed regimes raise rather than guess. Floors are taken
    exactly when the inputs are simple rationals, otherwise with a 1e-12
    guard band.
    """
    for name, x in (("alpha", alpha), ("beta", beta)):
        if not 0.0 <= x <= 1.0:
            raise ValueError(f"{name} = {x} is not a probability in [0, 1]")
    if N < 0:
        raise ValueError("horizon N must be >= 0")
    if beta == 0.0:
        raise AssumptionError("beta = 0 is outside every printed regime")

    exact = _exact_pair(alpha, beta)
    a: float | Fraction
    b: float | Fraction
    a, b = exact if exact is not None else (alpha, beta)

    phi = [0] * (N + 1)
    phi[0] = 1
    if beta >= 0.5:
        if alpha == 0.0:
            return MarkovPolicy([1] * (N + 1))
        if alpha == 1.0:
            for j in range(min(1, N) + 1):
                phi[j] = 1
            return MarkovPolicy(phi)
        r = _floor((b - 2 * a) * (1 - a) / (a * b)) + 2
        r = max(0, min(r, N))
        for j in range(r + 1):
            phi[j] = 1
        return MarkovPolicy(phi)

    # 0 < beta < 1/2: locate the first crossing of the island-splitting quantity
    crossing = None
    for ncand in range(N):
        quantity = (a + b) * b * (1 - a) ** ncand - b * (1 - a - b) ** (ncand + 1)
        if quantity >= a:
            crossing = ncand
            break
    if crossing is None:
        return MarkovPolicy(phi)  # stop only at the forced final index
    if alpha == 0.0:
        for j in range(crossing, N + 1):
            phi[j] = 1
        return MarkovPolicy(phi)
    if crossing < 1:
        raise AssumptionError(
            "crossing at index 0 with alpha > 0 is outside every printed regime"
        )
    r = crossing
    numerator = (a + b) * (a * a - a + b) * (1 - a) ** (r - 1) - a * (
        1 - (1 - a - b) ** (r + 1)
    )
    denominator = a * b * (a + b) * (1 - a) ** (r - 1)
    m = _floor(numerator / denominator) + 1
    if m < 1:
        raise AssumptionError(
            f"island length {m} < 1 is outside every printed regime"
        )
    for j in range(r + 1, min(r + m, N) + 1):
        phi[j] = 1
    return MarkovPolicy(phi)


def hy_nonhomogeneous_policy(spec: MarkovSpec) -> MarkovPolicy:
    """Single-island stop mask for chains with alpha_n + beta_n >= 1.

    The island end r is the first k whose accumulated criterion exceeds 1
    strictly; when no evaluable k crosses, every index stops (the same
    policy the formula approaches). The assumption alpha_n + beta_n >= 1 is
    a hard gate; terms that would divide by zero raise a domain error.
    """
    a, b = spec.alphas, spec.betas
    for n in range(spec.N + 1):
        if a[n] + b[n] < 1.0:
            raise AssumptionError(
                f"alpha_{n} + beta_{n} = {a[n] + b[n]} < 1 violates the model assumption"
            )
    r = spec.N
    acc = 0.0
    for k in range(spec.N):  # k = N needs an out-of-range beta term; see docstring
        if k >= 1:
            denom = (1.0 - a[k]) * (1.0 - a[k - 1])
            if denom == 0.0:
                raise ValueError(f"alpha at index {k} or {k - 1} equals 1: term undefined")
            acc += a[k] * b[k - 1] / denom
        if b[k + 1] == 0.0:
            raise ValueError(f"beta_{k + 1} = 0: look-ahead term undefined")
        if a[k] == 1.0:
            raise ValueError(f"alpha_{k} = 1: look-ahead term undefined")
        lookahead = b[k] * (1.0 - b[k + 1]) / (b[k + 1] * (1.0 - a[k]))
        if acc + lookahead > 1.0:
            r = k
            break
    phi = [1 if j <= r else 0 for j in range(spec.N + 1)]
    return MarkovPolicy(phi)


@dataclass(frozen=True)
class TamakiSpec:
    """Forward-indexed chain I_1..I_n with formal boundary entries.

    ``alphas[j-1]``/``betas[j-1]`` parameterize the j -> j+1 transition for
    j = 1..n-1; the trailing entries are the fixed formal boundary values
    alpha_n = 0, beta_n = 1 used by the threshold formula. The regularity
    assumptions (alpha non-increasing; beta non-decreasing and concave) are
    checked over the real transitions j = 1..n-1 only, since the boundary
    entries are conventions rather than model parameters. ``rho`` is the
    success probability of I_1, needed only for evaluation.
    """

    n: int
    alphas: tuple[float, ...]
    betas: tuple[float, ...]
    rho: float = 0.5

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("horizon must be >= 1")
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        if len(self.alphas) != self.n or len(self.betas) != self.n:
            raise ValueError(
                f"need {self.n} alpha/beta entries (boundary included), got "
                f"{len(self.alphas)}/{len(self.betas)}"
            )
        for name, values in (("alpha", self.alphas), ("beta", self.betas)):
            for j, x in enumerate(values, start=1):
                if not 0.0 <= x <= 1.0:
                    raise ValueError(f"{name}_{j} = {x} is not a probability in [0, 1]")
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError(f"rho = {self.rho} is not a probability in [0, 1]")
        if self.alphas[-1] != 0.0 or self.betas[-1] != 1.0:
            raise AssumptionError(
                "boundary entries must be alpha_n = 0, beta_n = 1 exactly"
            )
        real_a = self.alphas[: self.n - 1]
        real_b = self.betas[: self.n - 1]
        for j in range(len(real_a) - 1):
            if real_a[j + 1] > real_a[j] + 1e-12:
                raise AssumptionError(
                    f"alpha must be non-increasing: alpha_{j + 2} > alpha_{j + 1}"
                )
            if real_b[j + 1] < real_b[j] - 1e-12:
                raise AssumptionError(
                    f"beta must be non-decreasing: beta_{j + 2} < beta_{j + 1}"
                )
        for j in range(len(real_b) - 2):
            if real_b[j + 2] - 2 * real_b[j + 1] + real_b[j] > 1e-12:
                raise AssumptionError(
                    f"beta must be concave: positive second difference at j = {j + 1}"
                )

    @classmethod
    def from_transitions(
        cls,
        alphas: Sequence[float],
        betas: Sequence[float],
        rho: float = 0.5,
    ) -> TamakiSpec:
        """Build from the n-1 real transitions, appending the boundary."""
        if len(alphas) != len(betas):
            raise ValueError("alpha and beta transition lists must match in length")
        return cls(
            n=len(alphas) + 1,
            alphas=(*alphas, 0.0),
            betas=(*betas, 1.0),
            rho=rho,
        )


def tamaki_markov_threshold(spec: TamakiSpec) -> ThresholdRule:
    """Sum-of-transition-odds threshold for the forward chain.

    s is the largest k whose criterion
    ((1-beta_k)/beta_k) * (beta_{k+1}/(1-alpha_{k+1}))
    + sum_{j=k+1..n-1} (alpha_j/(1-alpha_j)) * (beta_{j+1}/(1-alpha_{j+1}))
    reaches 1 (empty sums count as 0); when no k qualifies the threshold
    defaults to 1, mirroring the independent-trials convention. The rule
    stops on the first success at forward index >= s. Known caveat: under
    the independent-chain embedding the criterion reproduces the trailing
    odds sums shifted by one index, so this threshold can sit one below the
    independent-trials optimum; the oracle quantifies any gap.
    """
    n = spec.n
    if n == 1:
        return ThresholdRule(1)
    a, b = spec.alphas, spec.betas

    def inner(j: int) -> float:
        if a[j - 1] == 1.0 or a[j] == 1.0:
            raise ValueError(f"alpha at forward index {j} or {j + 1} equals 1: term undefined")
        return (a[j - 1] / (1.0 - a[j - 1])) * (b[j] / (1.0 - a[j]))

    tail = 0.0  # sum_{j=k+1..n-1} inner(j), maintained while k descends
    for k in range(n, 0, -1):
        if k <= n - 2:
            tail += inner(k + 1)
        if k == n:
            crit = 0.0  # boundary beta_n = 1 zeroes the leading factor
        else:
            if a[k] == 1.0:
                raise ValueError(f"alpha at forward index {k + 1} equals 1: term undefined")
            if b[k - 1] == 0.0:
                crit = math.inf
            else:
                crit = ((1.0 - b[k - 1]) / b[k - 1]) * (b[k] / (1.0 - a[k])) + tail
        if crit >= 1.0:
            return ThresholdRule(k)
    return ThresholdRule(1)


def markov_from_tamaki(spec: TamakiSpec) -> MarkovSpec:
    """Re-index a forward chain as the equivalent backward chain."""
    n = spec.n
    alphas = [0.0] * n
    betas = [1.0] * n
    for bidx in range(1, n):
        alphas[bidx] = spec.alphas[n - bidx - 1]
        betas[bidx] = spec.betas[n - bidx - 1]
    return MarkovSpec(N=n - 1, alphas=tuple(alphas), betas=tuple(betas), rho=spec.rho)


def forward_threshold_policy(rule: ThresholdRule, n: int) -> MarkovPolicy:
    """Backward stop mask of "stop at first success at forward index >= s".

    Forward index k and backward index j are related by k = n - j.
    """
    if not 1 <= rule.s <= n:
        raise ValueError(f"threshold {rule.s} outside horizon {n}")
    return MarkovPolicy([1 if j <= n - rule.s else 0 for j in range(n)])


def markov_from_independent(seq: OddsSequence) -> MarkovSpec:
    """Embed independent trials as a (degenerate) backward chain.

    Backward index b corresponds to trial n - b; transition entries at index
    0 repeat the last real transition so the non-homogeneous formula can
    evaluate its full criterion on the embedding.
    """
    n = seq.n
    p = seq.probs
    alphas = [0.0] * n
    betas = [0.0] * n
    for b in range(1, n):
        alphas[b] = p[n - b]  # p_{n-b+1}
        betas[b] = 1.0 - p[n - b]
    if n >= 2:
        alphas[0] = alphas[1]
        betas[0] = betas[1]
    else:
        alphas[0] = p[0]
        betas[0] = 1.0 - p[0]
    return MarkovSpec(N=n - 1, alphas=tuple(alphas), betas=tuple(betas), rho=p[0])


def tamaki_from_independent(seq: OddsSequence, rho: float | None = None) -> TamakiSpec:
    """Embed independent trials as a forward chain (boundary appended)."""
    n = seq.n
    if n < 1:
        raise ValueError("horizon must be >= 1")
    alphas = [seq.probs[j] for j in range(1, n)]
    betas = [1.0 - seq.probs[j] for j in range(1, n)]
    return TamakiSpec.from_transitions(
        alphas, betas, rho=seq.probs[0] if rho is None else rho
    )
