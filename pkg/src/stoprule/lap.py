"""Continuous-time last-arrival problem with an unknown thinning rate.

Arrivals occur on [0, T] as a unit-rate (or lambda-rate) Poisson process;
each arrival is independently a success with unknown probability p, and only
the success arrivals are observable. The observable process is again Poisson
with rate lambda * p, and the player must stop exactly on its final arrival
knowing nothing about p. The optimal rule stops at the k-th observed arrival
time t_k as soon as k * (T - t_k) / t_k <= 1, i.e. once the remaining time
is dominated by the per-arrival spacing seen so far. An empty observable
trace is a loss by definition.

Simulation keeps the base process internal: rules only ever see the thinned
trace. Trials are chunked exactly like the Bernoulli simulator, so win-rate
estimates are bit-identical regardless of worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .montecarlo import SimulationReport, chunk_rng, chunk_sizes, report_from_wins


@dataclass(frozen=True)
class ArrivalTrace:
    """Strictly increasing arrival times in (0, T]; may be empty."""

    times: tuple[float, ...]
    T: float

    def __init__(self, times: Sequence[float], T: float):
        object.__setattr__(self, "times", tuple(float(t) for t in times))
        object.__setattr__(self, "T", float(T))
        if not self.T > 0.0:
            raise ValueError(f"horizon must be positive, got {T}")
        previous = 0.0
        for t in self.times:
            if not previous < t <= self.T:
                raise ValueError(
                    f"arrival times must be strictly increasing within (0, {self.T}]"
                )
            previous = t

    def __len__(self) -> int:
        return len(self.times)


@dataclass(frozen=True)
class LapModel:
    """Base arrival rate and success (thinning) probability."""

    base_rate: float = 1.0
    thin_p: float = 1.0

    def __post_init__(self) -> None:
        if not self.base_rate > 0.0:
            raise ValueError(f"base rate must be positive, got {self.base_rate}")
        if not 0.0 < self.thin_p <= 1.0:
            raise ValueError(f"thinning probability must be in (0, 1], got {self.thin_p}")


class LapOutcome(NamedTuple):
    stopped_ordinal: int | None
    win: bool


#: Repository reference estimate for the canonical configuration
#: (rate 1, p = 1, T = 10): lap_win_estimate(LapModel(1, 1), T=10,
#: trials=10**6, seed=0). No closed form is known for this value; the
#: estimate and its 95% CI are pinned here and re-checked statistically
#: by the acceptance suite.
REFERENCE_WIN_RATE = {
    "rate": 1.0,
    "thin_p": 1.0,
    "T": 10.0,
    "trials": 10**6,
    "seed": 0,
    "estimate": 0.346671,
    "ci95": (0.3457388243777254, 0.3476043536318284),
}


def simulate_poisson(rate: float, T: float, seed: int) -> ArrivalTrace:
    """Homogeneous Poisson trace: Poisson(rate*T) count, sorted uniform times."""
    if not rate > 0.0:
        raise ValueError(f"rate must be positive, got {rate}")
    if not T > 0.0:
        raise ValueError(f"horizon must be positive, got {T}")
    rng = np.random.default_rng(seed)
    count = int(rng.poisson(rate * T))
    while True:
        times = np.sort(T * (1.0 - rng.random(count)))  # values in (0, T]
        if count < 2 or np.all(np.diff(times) > 0.0):
            return ArrivalTrace(times, T)


def thin(trace: ArrivalTrace, p: float, seed: int) -> ArrivalTrace:
    """Keep each arrival independently with probability p, preserving order."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"thinning probability must be in [0, 1], got {p}")
    rng = np.random.default_rng(seed)
    keep = rng.random(len(trace.times)) < p
    return ArrivalTrace([t for t, k in zip(trace.times, keep) if k], trace.T)


def lap_decide(k: int, t_k: float, T: float) -> bool:
    """Stop at the k-th arrival at time t_k? True iff k*(T - t_k)/t_k <= 1."""
    if k < 1:
        raise ValueError(f"arrival ordinal must be >= 1, got {k}")
    if t_k == 0.0:
        raise ValueError("arrival time 0 leaves the decision ratio undefined")
    if not 0.0 < t_k <= T:
        raise ValueError(f"arrival time {t_k} outside (0, {T}]")
    return k * (T - t_k) / t_k <= 1.0


def lap_play(trace: ArrivalTrace, T: float | None = None) -> LapOutcome:
    """Run the stopping rule over a trace; win = stopped on its final arrival."""
    horizon = trace.T if T is None else float(T)
    for k, t in enumerate(trace.times, start=1):
        if lap_decide(k, t, horizon):
            return LapOutcome(k, k == len(trace.times))
    return LapOutcome(None, False)


def _chunk_wins(model: LapModel, T: float, rows: int, rng: np.random.Generator) -> int:
    """Vectorized play of one chunk; draws are base counts, times, keep flags."""
    counts = rng.poisson(model.base_rate * T, rows)
    total = int(counts.sum())
    flat_times = T * (1.0 - rng.random(total))
    keep = rng.random(total) < model.thin_p
    trial_ids = np.repeat(np.arange(rows), counts)
    kept_times = flat_times[keep]
    kept_ids = trial_ids[keep]
    order = np.lexsort((kept_times, kept_ids))
    kt = kept_times[order]
    kid = kept_ids[order]
    kept_counts = np.bincount(kid, minlength=rows)
    starts = np.concatenate(([0], np.cumsum(kept_counts)[:-1]))
    ordinals = np.arange(len(kt)) - starts[kid] + 1
    stop_here = ordinals * (T - kt) / kt <= 1.0
    nonempty = kept_counts > 0
    if not nonempty.any():
        return 0
    position = np.where(stop_here, np.arange(len(kt)), len(kt))
    first = np.minimum.reduceat(position, starts[nonempty])
    ends = (starts + kept_counts)[nonempty]
    stopped = first < len(kt)
    return int((stopped & (first == ends - 1)).sum())


def lap_win_estimate(
    model: LapModel,
    T: float,
    trials: int = 100_000,
    seed: int = 0,
    workers: int = 1,
) -> SimulationReport:
    """Monte Carlo win rate of the stopping rule with a score-method CI."""
    if not T > 0.0:
        raise ValueError(f"horizon must be positive, got {T}")
    if trials < 1:
        raise ValueError("need at least one trial")
    sizes = chunk_sizes(trials)

    def eval_chunk(chunk_index: int) -> int:
        rng = chunk_rng(seed, chunk_index)
        return _chunk_wins(model, T, sizes[chunk_index], rng)

    if workers <= 1:
        wins = sum(eval_chunk(c) for c in range(len(sizes)))
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            wins = sum(pool.map(eval_chunk, range(len(sizes))))
    return report_from_wins(wins, trials, seed)


@dataclass(frozen=True)
class MartingalePoint:
    t: float
    mean: float
    target: float
    sigma: float
    ok: bool


@dataclass(frozen=True)
class MartingalePair:
    t_low: float
    t_high: float
    mean_dev: float
    sigma: float
    ok: bool


@dataclass(frozen=True)
class PiMartingaleReport:
    grid: tuple[float, ...]
    trials: int
    seed: int
    points: tuple[MartingalePoint, ...]
    pairs: tuple[MartingalePair, ...]
    max_pairwise_dev: float
    passed: bool


def pi_martingale_check(
    model: LapModel,
    grid: Sequence[float],
    trials: int = 100_000,
    seed: int = 0,
) -> PiMartingaleReport:
    """Statistical check of the proportional-increments property.

    The observable process has mean count lambda * p * t, so the ratio
    count(t)/t has the same mean lambda * p at every grid point. Each point
    is checked against that target at 3 sigma, and every grid pair is
    checked for mean-zero paired differences at 4 sigma (the pairing
    cancels most of the shared variance). The largest pairwise deviation is
    reported.

    The strictly pathwise martingale version of the property belongs to the
    unknown-rate model and has no fixed-p simulation: conditioned on the
    first jump, count(t)/t has provably different means at different t for
    any fixed p. The expectation form checked here is what fixed-p draws
    can and must satisfy.
    """
    ts = tuple(sorted(float(t) for t in grid))
    if not ts or ts[0] <= 0.0:
        raise ValueError("grid points must be positive")
    T = ts[-1]
    rate = model.base_rate * model.thin_p
    g = len(ts)
    sum_ratio = np.zeros(g)
    sum_sq = np.zeros(g)
    pair_index = [(i, j) for i in range(g) for j in range(i + 1, g)]
    pair_sum = np.zeros(len(pair_index))
    pair_sumsq = np.zeros(len(pair_index))

    for chunk_index, rows in enumerate(chunk_sizes(trials)):
        rng = chunk_rng(seed, chunk_index)
        counts = rng.poisson(model.base_rate * T, rows)
        total = int(counts.sum())
        flat_times = T * (1.0 - rng.random(total))
        keep = rng.random(total) < model.thin_p
        trial_ids = np.repeat(np.arange(rows), counts)
        kept_times = flat_times[keep]
        kept_ids = trial_ids[keep]
        ratios = np.empty((rows, g))
        for gi, t in enumerate(ts):
            counts_at_t = np.bincount(
                kept_ids, weights=(kept_times <= t).astype(float), minlength=rows
            )
            ratios[:, gi] = counts_at_t / t
        sum_ratio += ratios.sum(axis=0)
        sum_sq += (ratios**2).sum(axis=0)
        for pi, (i, j) in enumerate(pair_index):
            dev = ratios[:, j] - ratios[:, i]
            pair_sum[pi] += dev.sum()
            pair_sumsq[pi] += (dev**2).sum()

    points = []
    for gi, t in enumerate(ts):
        mean = sum_ratio[gi] / trials
        var = max(sum_sq[gi] / trials - mean * mean, 0.0)
        sigma = math.sqrt(var / trials)
        points.append(
            MartingalePoint(
                t=t,
                mean=mean,
                target=rate,
                sigma=sigma,
                ok=abs(mean - rate) <= 3.0 * max(sigma, 1e-300),
            )
        )
    pairs = []
    max_dev = 0.0
    for pi, (i, j) in enumerate(pair_index):
        mean_dev = pair_sum[pi] / trials
        var = max(pair_sumsq[pi] / trials - mean_dev * mean_dev, 0.0)
        sigma = math.sqrt(var / trials)
        ok = abs(mean_dev) <= 4.0 * max(sigma, 1e-300)
        max_dev = max(max_dev, abs(mean_dev))
        pairs.append(
            MartingalePair(t_low=ts[i], t_high=ts[j], mean_dev=mean_dev, sigma=sigma, ok=ok)
        )
    return PiMartingaleReport(
        grid=ts,
        trials=trials,
        seed=seed,
        points=tuple(points),
        pairs=tuple(pairs),
        max_pairwise_dev=max_dev,
        passed=all(p.ok for p in points) and all(p.ok for p in pairs),
    )
