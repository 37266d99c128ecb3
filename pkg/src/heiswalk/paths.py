"""Oriented paths on the Heisenberg Cayley graph as 0/1 words.

A word alpha_0 .. alpha_{k-1} encodes a directed path from the identity:
bit 0 takes the A-edge, bit 1 the B-edge.  After t steps the position is

    x = #zeros, y = #ones, z = -sum over zero bits j < t of (#ones before j)

and two paths occupy the same vertex at time t exactly when their prefix
bit counts and prefix weighted sums sum_{j<t} j*alpha_j both agree, so
pair statistics reduce to integer comparisons that vectorize over large
Monte Carlo batches.

The intersection-tail estimator counts shared directed edges between
independent uniform path pairs (a shared edge at step t needs coinciding
positions at t plus equal bits at index t).  Vertex coincidences and
fresh re-meets after separation are tallied alongside; all three tails
feed the exponential-tail and memorylessness checks.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .fitting import LineFit, fit_exponential
from .heisenberg import GroupElement
from .rng import stream

__all__ = [
    "sample_word",
    "position",
    "weighted_sum",
    "coincides",
    "vertex_coincidences",
    "shared_edges",
    "TailEstimate",
    "tail_estimate",
    "endpoint_collision_frequency",
    "continuation_ratios",
    "DEFAULT_MIN_FIT_COUNT",
]

DEFAULT_MIN_FIT_COUNT = 50


def sample_word(k: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform 0/1 word of length k as a uint8 array."""
    return rng.integers(0, 2, size=k, dtype=np.uint8)


def _as_bits(word) -> np.ndarray:
    bits = np.asarray(word, dtype=np.uint8)
    if bits.ndim != 1 or np.any(bits > 1):
        raise ValueError("a word is a one-dimensional array of 0/1 bits")
    return bits


def position(word, t: int | None = None) -> GroupElement:
    """Vertex reached after the first t steps of the word."""
    bits = _as_bits(word)
    t = bits.size if t is None else int(t)
    if not 0 <= t <= bits.size:
        raise ValueError(f"time {t} outside 0..{bits.size}")
    prefix = bits[:t].astype(np.int64)
    y = int(prefix.sum())
    ones_before = np.cumsum(prefix) - prefix
    z = -int(ones_before[prefix == 0].sum())
    return GroupElement(t - y, y, z)


def weighted_sum(word, t: int | None = None) -> int:
    """sum_{j < t} j * alpha_j for the first t bits."""
    bits = _as_bits(word)
    t = bits.size if t is None else int(t)
    if not 0 <= t <= bits.size:
        raise ValueError(f"time {t} outside 0..{bits.size}")
    return int(np.dot(np.arange(t, dtype=np.int64), bits[:t].astype(np.int64)))


def coincides(u, v, t: int) -> bool:
    """True when the two paths occupy the same vertex at time t.

    Uses the count/weighted-sum reduction; position() gives the same
    answer by construction of the group law.
    """
    ub, vb = _as_bits(u), _as_bits(v)
    if t > ub.size or t > vb.size:
        raise ValueError("time beyond a word's length")
    if int(ub[:t].sum()) != int(vb[:t].sum()):
        return False
    return weighted_sum(ub, t) == weighted_sum(vb, t)


def vertex_coincidences(u, v) -> int:
    """Number of times t >= 1 at which the paths share a vertex."""
    ub, vb = _as_bits(u), _as_bits(v)
    k = min(ub.size, vb.size)
    return sum(1 for t in range(1, k + 1) if coincides(ub, vb, t))


def shared_edges(u, v) -> int:
    """Number of directed edges traversed by both paths.

    Positions carry their step count, so a common edge is always crossed
    at the same time index by both paths: count steps t with coinciding
    positions at t and equal bits at index t.
    """
    ub, vb = _as_bits(u), _as_bits(v)
    k = min(ub.size, vb.size)
    return sum(1 for t in range(k) if ub[t] == vb[t] and coincides(ub, vb, t))


@dataclass
class TailEstimate:
    """Survivor counts and a fitted geometric ratio for intersection tails.

    counts[n] is the number of sampled pairs with at least n shared
    edges; vertex_counts and excursion_counts are the analogous tails for
    vertex coincidences and for fresh re-meets after separation.
    theta_hat is exp(slope) of a weighted fit of log counts[n] against n
    over fit_range (n >= 1 with counts >= the configured minimum), None
    when fewer than three points qualify.  std_errors hold the per-n
    standard error of log counts[n].  censoring_bound is the integral
    bound on intersections lost beyond the horizon.
    """

    horizon: int
    samples: int
    counts: dict[int, int]
    vertex_counts: dict[int, int] = field(default_factory=dict)
    excursion_counts: dict[int, int] = field(default_factory=dict)
    theta_hat: float | None = None
    theta_se: float | None = None
    r_squared: float | None = None
    fit_range: list[int] = field(default_factory=list)
    std_errors: dict[int, float] = field(default_factory=dict)
    censoring_bound: float = 0.0


def _survivors(values: np.ndarray) -> dict[int, int]:
    """values -> survivor counts {n: #values >= n} for n = 0..max."""
    hist = np.bincount(values)
    tail = np.cumsum(hist[::-1])[::-1]
    return {n: int(tail[n]) for n in range(tail.size)}


def _fit_tail(counts: dict[int, int], samples: int, min_count: int):
    """Weighted geometric fit of the survivor tail; returns fit pieces."""
    ns = sorted(n for n, c in counts.items() if n >= 1 and c >= min_count)
    std_errors = {
        n: float(np.sqrt(max(1.0 - c / samples, 0.0) / c))
        for n, c in counts.items()
        if c > 0
    }
    if len(ns) < 3:
        return None, None, None, [], std_errors
    y = np.array([counts[n] for n in ns], dtype=float)
    fit: LineFit = fit_exponential(ns, y, weights=y)
    theta = float(np.exp(fit.slope))
    return theta, theta * fit.slope_se, fit.r_squared, ns, std_errors


def _pair_statistics_chunk(horizon: int, n_pairs: int, seed: int, index: int):
    """Shared-edge / vertex / re-meet counts for one deterministic chunk."""
    rng = stream(seed, index)
    u = rng.integers(0, 2, size=(n_pairs, horizon), dtype=np.uint8)
    v = rng.integers(0, 2, size=(n_pairs, horizon), dtype=np.uint8)
    jr = np.arange(horizon, dtype=np.int32)
    cu = np.cumsum(u, axis=1, dtype=np.int32)
    cv = np.cumsum(v, axis=1, dtype=np.int32)
    wu = np.cumsum(u * jr, axis=1, dtype=np.int64)
    wv = np.cumsum(v * jr, axis=1, dtype=np.int64)
    # eq[:, i] <=> positions coincide at time i+1
    eq = (cu == cv) & (wu == wv)
    bits_eq = u == v
    vertices = eq.sum(axis=1, dtype=np.int64)
    shared = bits_eq[:, 0].astype(np.int64) + (eq[:, :-1] & bits_eq[:, 1:]).sum(
        axis=1, dtype=np.int64
    )
    remeets = (eq[:, 1:] & ~eq[:, :-1]).sum(axis=1, dtype=np.int64)
    return (
        np.bincount(shared, minlength=horizon + 1),
        np.bincount(vertices, minlength=horizon + 1),
        np.bincount(remeets, minlength=horizon + 1),
    )


def tail_estimate(
    horizon: int,
    samples: int,
    seed: int,
    *,
    min_count: int = DEFAULT_MIN_FIT_COUNT,
    decay_exponent: float = 2.0,
    threads: int = 1,
    chunk: int = 1024,
) -> TailEstimate:
    """Monte Carlo intersection tails for uniform path pairs on G_H.

    Pairs are drawn in fixed chunks with one counter-based stream per
    chunk, so the result depends only on (horizon, samples, seed) and
    never on the thread count.  decay_exponent is the per-step collision
    decay rate used for the horizon-censoring bound
    sum_{t > horizon} t^-beta <= horizon^(1-beta) / (beta-1).
    """
    if horizon < 1 or samples < 1:
        raise ValueError("horizon and samples must be positive")
    if horizon * (horizon - 1) // 2 > np.iinfo(np.int32).max:
        raise ValueError("horizon too large for 32-bit prefix weights")
    n_chunks = (samples + chunk - 1) // chunk
    sizes = [min(chunk, samples - i * chunk) for i in range(n_chunks)]
    jobs = [(horizon, sizes[i], seed, i) for i in range(n_chunks)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda a: _pair_statistics_chunk(*a), jobs))
    else:
        parts = [_pair_statistics_chunk(*a) for a in jobs]
    shared_hist = np.sum([p[0] for p in parts], axis=0)
    vertex_hist = np.sum([p[1] for p in parts], axis=0)
    remeet_hist = np.sum([p[2] for p in parts], axis=0)

    def survivors(hist: np.ndarray) -> dict[int, int]:
        nz = np.flatnonzero(hist)
        top = int(nz[-1]) if nz.size else 0
        tail = np.cumsum(hist[: top + 1][::-1])[::-1]
        return {n: int(tail[n]) for n in range(top + 1)}

    counts = survivors(shared_hist)
    theta, theta_se, r2, fit_range, std_errors = _fit_tail(counts, samples, min_count)
    beta = float(decay_exponent)
    return TailEstimate(
        horizon=horizon,
        samples=samples,
        counts=counts,
        vertex_counts=survivors(vertex_hist),
        excursion_counts=survivors(remeet_hist),
        theta_hat=theta,
        theta_se=theta_se,
        r_squared=r2,
        fit_range=fit_range,
        std_errors=std_errors,
        censoring_bound=horizon ** (1.0 - beta) / (beta - 1.0),
    )


def endpoint_collision_frequency(k: int, samples: int, seed: int, chunk: int = 4096) -> float:
    """Fraction of independent pairs of length-k words meeting at time k."""
    hits = 0
    done = 0
    index = 0
    jr = np.arange(k, dtype=np.int64)
    while done < samples:
        n = min(chunk, samples - done)
        rng = stream(seed, index)
        u = rng.integers(0, 2, size=(n, k), dtype=np.uint8)
        v = rng.integers(0, 2, size=(n, k), dtype=np.uint8)
        same_count = u.sum(axis=1, dtype=np.int64) == v.sum(axis=1, dtype=np.int64)
        same_weight = (u @ jr) == (v @ jr)
        hits += int(np.count_nonzero(same_count & same_weight))
        done += n
        index += 1
    return hits / samples


def continuation_ratios(survivor_counts: dict[int, int], min_count: int = DEFAULT_MIN_FIT_COUNT):
    """Per-level continuation probabilities of a survivor tail.

    For each n with survivor_counts[n] >= min_count and n+1 present,
    returns (n, ratio, se) rows plus the pooled ratio, where ratio is
    counts[n+1]/counts[n] and se uses the pooled ratio's binomial spread.
    Under a memoryless tail all ratios estimate one constant.
    """
    ns = [
        n
        for n in sorted(survivor_counts)
        if survivor_counts[n] >= min_count and (n + 1) in survivor_counts
    ]
    if not ns:
        return [], float("nan")
    num = sum(survivor_counts[n + 1] for n in ns)
    den = sum(survivor_counts[n] for n in ns)
    pooled = num / den
    rows = []
    for n in ns:
        c = survivor_counts[n]
        ratio = survivor_counts[n + 1] / c
        se = float(np.sqrt(max(pooled * (1.0 - pooled), 1e-12) / c))
        rows.append((n, ratio, se))
    return rows, pooled
