"""Reference models: oriented walks on Z^d and simple random walk on G_H.

These calibrate the Heisenberg results against lattices where the
answers are classical:

* zd_collision_probability -- exact meeting probability at time k of two
  oriented walks on Z^d (uniform positive steps), k^(-(d-1)/2) scale.
* theta_d_estimate -- Monte Carlo return probability of the difference
  of two oriented walks, the constant governing intersection tails.  The
  difference walk holds in place with probability 1/d; by convention a
  return only counts once the walk has actually left the origin, i.e.
  the estimate targets the embedded (jump-chain) return probability.
  Derived constants for the other conventions are provided:
  lazy_return_probability folds the holds back in, and
  edge_collision_rate is the exact geometric ratio of the shared-edge
  tail implied by a renewal argument at each shared edge.
* zd_eit_tail -- the same shared-edge tail statistic as on G_H.
* srw_return_probability -- exact return probabilities of simple random
  walk on G_H (uniform on a, a^-1, b, b^-1) by dense convolution,
  n^(-2) scale at even times.
* srw_mutual_intersections -- Monte Carlo range intersections of two
  independent SRWs at doubling time checkpoints (unbounded growth).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import CapExceededError
from .paths import DEFAULT_MIN_FIT_COUNT, TailEstimate, _fit_tail
from .rng import stream

__all__ = [
    "zd_collision_probability",
    "theta_d_estimate",
    "lazy_return_probability",
    "edge_collision_rate",
    "difference_walk_return_by",
    "zd_eit_tail",
    "srw_return_probability",
    "srw_return_profile",
    "SrwReturnProfile",
    "srw_mutual_intersections",
    "IntersectionGrowth",
    "ZD_COLLISION_K_CAP",
    "SRW_TIME_CAP",
]

ZD_COLLISION_K_CAP = 2048
SRW_TIME_CAP = 128  # walk steps; memory grows like the cube of this


def zd_collision_probability(d: int, k: int) -> float:
    """P[two independent oriented k-step walks on Z^d end at the same site].

    Each step adds a uniformly chosen basis vector, so the endpoint is a
    multinomial count vector and the meeting probability is
    sum_v (multinomial(k; v) / d^k)^2.  Evaluated in exact integer
    arithmetic as a one-dimensional convolution over coordinates:
    squared binomial factors accumulate against the slots used so far.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    if k < 0:
        raise ValueError("k must be >= 0")
    if k > ZD_COLLISION_K_CAP:
        raise CapExceededError(f"k={k} exceeds cap {ZD_COLLISION_K_CAP}")
    f = [0] * (k + 1)
    f[0] = 1
    for _ in range(d):
        g = [0] * (k + 1)
        for t in range(k + 1):
            acc = 0
            for v in range(t + 1):
                prev = f[t - v]
                if prev:
                    acc += prev * math.comb(k - (t - v), v) ** 2
            g[t] = acc
        f = g
    return float(Fraction(f[k], d ** (2 * k)))


def lazy_return_probability(d: int, theta_embedded: float) -> float:
    """Return probability counting holds at the origin as returns.

    The difference walk holds with probability 1/d; a hold at the origin
    is itself a time at the origin, so the lazy-convention probability
    is 1/d + (1 - 1/d) * theta_embedded.
    """
    return 1.0 / d + (1.0 - 1.0 / d) * theta_embedded


def edge_collision_rate(d: int, theta_embedded: float) -> float:
    """Geometric ratio of the shared-edge tail implied by returns.

    From coinciding positions the walks share the next edge with
    probability 1/d; otherwise they separate and meet again with the
    embedded return probability, restarting the trial.  Solving the
    renewal equation q = 1/d + (1 - 1/d) * theta * q gives the ratio.
    It always lies below the lazy-convention return probability, which
    is why that constant bounds the shared-edge tail.
    """
    return (1.0 / d) / (1.0 - (1.0 - 1.0 / d) * theta_embedded)


_THETA_BLOCK = 256


def _theta_chunk(d: int, horizon: int, n: int, seed: int, index: int) -> np.ndarray:
    """First-return times (0 = none by horizon) for one stream of walks."""
    rng = stream(seed, index)
    pos = np.zeros((n, d), dtype=np.int32)
    has_left = np.zeros(n, dtype=bool)
    return_time = np.zeros(n, dtype=np.int64)
    done = np.zeros(n, dtype=bool)
    t0 = 0
    while t0 < horizon:
        block = min(_THETA_BLOCK, horizon - t0)
        # always draw full blocks so runs at different horizons share a
        # sample path prefix; theta_hat is then monotone in horizon pathwise
        inc_i = rng.integers(0, d, size=(n, _THETA_BLOCK), dtype=np.uint8)[:, :block]
        inc_j = rng.integers(0, d, size=(n, _THETA_BLOCK), dtype=np.uint8)[:, :block]
        at_origin = np.ones((n, block), dtype=bool)
        for c in range(d):
            coord = pos[:, c : c + 1] + np.cumsum(
                (inc_i == c).astype(np.int32) - (inc_j == c), axis=1, dtype=np.int32
            )
            at_origin &= coord == 0
            pos[:, c] = coord[:, -1]
        left_by = np.cumsum(~at_origin, axis=1) > 0
        ret = at_origin & (has_left[:, None] | left_by)
        ret[done] = False
        hit = ret.any(axis=1)
        first = np.argmax(ret, axis=1)
        return_time[hit] = t0 + first[hit] + 1
        done |= hit
        has_left |= left_by[:, -1]
        t0 += block
    return return_time


def theta_d_estimate(
    d: int,
    horizon: int,
    samples: int,
    seed: int,
    *,
    threads: int = 1,
    chunk: int = 16384,
) -> tuple[float, float]:
    """Monte Carlo embedded return probability of the difference walk.

    Simulates the difference of two oriented walks for `horizon` steps
    and reports the fraction that revisit the origin after having left
    it, plus a censoring bound: returns later than the horizon are
    extrapolated from the frequency of returns in (horizon/2, horizon]
    under the t^(-(d-1)/2) first-return tail, vacuous (inf) for d <= 3
    where the difference walk is recurrent.
    """
    if d < 2:
        raise ValueError("d must be >= 2 for a nondegenerate difference walk")
    if horizon < 1 or samples < 1:
        raise ValueError("horizon and samples must be positive")
    times = _map_chunks(
        lambda size, idx: _theta_chunk(d, horizon, size, seed, idx),
        samples,
        chunk,
        threads,
    )
    returned = int(np.count_nonzero(times))
    theta_hat = returned / samples
    beta = (d - 1) / 2.0
    if beta <= 1.0:
        return theta_hat, float("inf")
    late = int(np.count_nonzero(times > horizon // 2))
    censoring = (late / samples) / (2.0 ** (beta - 1.0) - 1.0)
    return theta_hat, censoring


def _map_chunks(fn, total: int, chunk: int, threads: int) -> np.ndarray:
    """Run fn(size, index) over fixed-size chunks; order-stable merge."""
    from concurrent.futures import ThreadPoolExecutor

    n_chunks = (total + chunk - 1) // chunk
    sizes = [min(chunk, total - i * chunk) for i in range(n_chunks)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda i: fn(sizes[i], i), range(n_chunks)))
    else:
        parts = [fn(sizes[i], i) for i in range(n_chunks)]
    return np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)


def difference_walk_return_by(d: int, horizon: int) -> float:
    """Exact P[difference walk returns by `horizon`], embedded convention.

    Independent oracle for theta_d_estimate at small horizons: dense
    convolution of the lazy difference walk on the zero-sum hyperplane
    (coordinates projected to the first d-1), with the origin absorbing
    once the walk has left it.  Mixes over the geometric time of the
    first actual move.
    """
    if d < 2:
        raise ValueError("d must be >= 2")
    if horizon < 1:
        return 0.0
    if horizon > 96:
        raise CapExceededError("exact difference-walk DP is for horizons <= 96")
    dim = d - 1
    # projected increments e_i - e_j for i != j, with multiplicity
    moves: dict[tuple[int, ...], float] = {}
    for i in range(d):
        for j in range(d):
            if i == j:
                continue
            vec = [0] * dim
            if i < dim:
                vec[i] += 1
            if j < dim:
                vec[j] -= 1
            key = tuple(vec)
            moves[key] = moves.get(key, 0.0) + 1.0 / (d * d)
    hold = 1.0 / d

    r = horizon  # box radius
    shape = (2 * r + 1,) * dim
    grid = np.zeros(shape)
    origin = (r,) * dim
    # start: distribution after the first actual move
    move_mass = 1.0 - hold
    for vec, w in moves.items():
        grid[tuple(r + v for v in vec)] += w / move_mass

    def shifted(g: np.ndarray, vec: tuple[int, ...]) -> np.ndarray:
        out = g
        for axis, v in enumerate(vec):
            out = np.roll(out, v, axis=axis)
            # zero the wrapped band
            sl = [slice(None)] * dim
            if v > 0:
                sl[axis] = slice(0, v)
            elif v < 0:
                sl[axis] = slice(v, None)
            if v != 0:
                out[tuple(sl)] = 0.0
        return out

    absorbed = np.zeros(horizon)  # absorbed[h] = P[back at origin within h steps of the move]
    acc = grid[origin]
    grid[origin] = 0.0
    absorbed[0] = acc
    for h in range(1, horizon):
        nxt = hold * grid
        for vec, w in moves.items():
            nxt += w * shifted(grid, vec)
        grid = nxt
        acc += grid[origin]
        grid[origin] = 0.0
        absorbed[h] = acc

    # first actual move at step m with probability hold^(m-1) * (1 - hold)
    total = 0.0
    for m in range(1, horizon + 1):
        total += hold ** (m - 1) * move_mass * absorbed[horizon - m]
    return float(total)


def _zd_pair_chunk(d: int, horizon: int, n: int, seed: int, index: int):
    rng = stream(seed, index)
    u = rng.integers(0, d, size=(n, horizon), dtype=np.uint8)
    v = rng.integers(0, d, size=(n, horizon), dtype=np.uint8)
    eq = np.ones((n, horizon), dtype=bool)
    for c in range(d - 1):  # counts of d-1 letters pin the count vector
        eq &= np.cumsum(u == c, axis=1, dtype=np.int32) == np.cumsum(
            v == c, axis=1, dtype=np.int32
        )
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


def zd_eit_tail(
    d: int,
    horizon: int,
    samples: int,
    seed: int,
    *,
    min_count: int = DEFAULT_MIN_FIT_COUNT,
    threads: int = 1,
    chunk: int = 1024,
) -> TailEstimate:
    """Shared-edge intersection tail for oriented walk pairs on Z^d.

    Same statistic and fitting as the Heisenberg tail_estimate; the
    horizon-censoring bound uses the per-step meeting decay (d-1)/2.
    The excursion_counts tail (fresh re-meets after separation) is the
    statistic whose geometric ratio equals the embedded return
    probability; the shared-edge ratio equals edge_collision_rate of it.
    """
    if d < 2:
        raise ValueError("d must be >= 2")
    from concurrent.futures import ThreadPoolExecutor

    n_chunks = (samples + chunk - 1) // chunk
    sizes = [min(chunk, samples - i * chunk) for i in range(n_chunks)]
    jobs = list(range(n_chunks))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda i: _zd_pair_chunk(d, horizon, sizes[i], seed, i), jobs))
    else:
        parts = [_zd_pair_chunk(d, horizon, sizes[i], seed, i) for i in jobs]
    shared_hist = np.sum([p[0] for p in parts], axis=0)
    vertex_hist = np.sum([p[1] for p in parts], axis=0)
    remeet_hist = np.sum([p[2] for p in parts], axis=0)

    def survivors(hist: np.ndarray) -> dict[int, int]:
        nz = np.flatnonzero(hist)
        top = int(nz[-1]) if nz.size else 0
        tail = np.cumsum(hist[: top + 1][::-1])[::-1]
        return {i: int(tail[i]) for i in range(top + 1)}

    counts = survivors(shared_hist)
    theta, theta_se, r2, fit_range, std_errors = _fit_tail(counts, samples, min_count)
    beta = (d - 1) / 2.0
    censoring = float("inf") if beta <= 1.0 else horizon ** (1.0 - beta) / (beta - 1.0)
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
        censoring_bound=censoring,
    )


@dataclass(frozen=True)
class SrwReturnProfile:
    """P[SRW on G_H is at the identity at time t] for t = 0..len-1.

    `dropped_mass` is the total probability clipped at the box boundary
    over the whole evolution; it bounds the absolute error of every
    entry.  Odd times are exactly zero by parity.
    """

    probabilities: np.ndarray
    dropped_mass: float


@lru_cache(maxsize=4)
def _srw_profile_cached(t_max: int) -> SrwReturnProfile:
    n = t_max
    # z tails decay like exp(-c|z|/t): a box linear in t suffices, and 6.4t
    # keeps the total clipped mass below 1e-10 out to t=96 (measured)
    b_xy = min(n, int(math.ceil(7.5 * math.sqrt(max(n, 1) / 2.0))) + 2)
    b_z = min(n * (n - 1) // 2 + 1, int(math.ceil(6.4 * n)) + 4)
    nx = 2 * b_xy + 1
    nz = 2 * b_z + 1
    cur = np.zeros((nx, nx, nz))
    cur[b_xy, b_xy, b_z] = 1.0
    nxt = np.zeros_like(cur)
    probs = np.zeros(t_max + 1)
    probs[0] = 1.0
    mass = 1.0
    for t in range(1, t_max + 1):
        nxt[:] = 0.0
        # b step: (x, y+1, z); b inverse: (x, y-1, z)
        nxt[:, 1:, :] += 0.25 * cur[:, :-1, :]
        nxt[:, :-1, :] += 0.25 * cur[:, 1:, :]
        # a step: (x+1, y, z-y); a inverse: (x-1, y, z+y)
        for yi in range(nx):
            y = yi - b_xy
            if y > 0:
                nxt[1:, yi, : nz - y] += 0.25 * cur[:-1, yi, y:]
                nxt[:-1, yi, y:] += 0.25 * cur[1:, yi, : nz - y]
            elif y < 0:
                nxt[1:, yi, -y :] += 0.25 * cur[:-1, yi, : nz + y]
                nxt[:-1, yi, : nz + y] += 0.25 * cur[1:, yi, -y :]
            else:
                nxt[1:, yi, :] += 0.25 * cur[:-1, yi, :]
                nxt[:-1, yi, :] += 0.25 * cur[1:, yi, :]
        cur, nxt = nxt, cur
        new_mass = float(cur.sum())
        probs[t] = cur[b_xy, b_xy, b_z]
        mass = new_mass
    return SrwReturnProfile(probs, max(0.0, 1.0 - mass))


def srw_return_profile(t_max: int) -> SrwReturnProfile:
    """Exact SRW return probabilities on G_H for all times up to t_max."""
    if t_max < 0:
        raise ValueError("t_max must be >= 0")
    if t_max > SRW_TIME_CAP:
        raise CapExceededError(f"t_max={t_max} exceeds cap {SRW_TIME_CAP}")
    return _srw_profile_cached(int(t_max))


def srw_return_probability(t: int) -> float:
    """P[simple random walk on G_H is at the identity at time t]."""
    return float(srw_return_profile(t).probabilities[t])


@dataclass(frozen=True)
class IntersectionGrowth:
    """Range-intersection sizes of two independent SRWs on G_H.

    values[i, j] is |range_u(times[j]) intersect range_v(times[j])| for
    sample pair i; means and std_errors summarize the columns.
    """

    times: tuple[int, ...]
    means: np.ndarray
    std_errors: np.ndarray
    values: np.ndarray

    @property
    def series(self) -> list[tuple[int, float]]:
        return [(t, float(m)) for t, m in zip(self.times, self.means)]

    def growth_z(self, i: int = -1, j: int = 1) -> float:
        """Paired z-score of means[i] - means[j] (defaults: last vs first positive)."""
        diff = self.values[:, i].astype(float) - self.values[:, j].astype(float)
        se = diff.std(ddof=1) / math.sqrt(diff.size)
        return float(diff.mean() / se) if se > 0 else float("inf")


_SRW_STEPS = ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0))


def srw_mutual_intersections(
    n_base: int, samples: int, seed: int, num_doublings: int = 2
) -> IntersectionGrowth:
    """Common range vertices of two SRWs at doubling checkpoints.

    Checkpoints are 0, n_base, 2*n_base, ..., 2^num_doublings * n_base;
    at time 0 both ranges are {identity}, so the mean there is exactly 1.
    """
    if n_base < 1 or samples < 1:
        raise ValueError("n_base and samples must be positive")
    times = (0,) + tuple(n_base * 2**i for i in range(num_doublings + 1))
    t_max = times[-1]
    values = np.zeros((samples, len(times)), dtype=np.int64)
    for i in range(samples):
        rng = stream(seed, i)
        gu = rng.integers(0, 4, size=t_max, dtype=np.uint8)
        gv = rng.integers(0, 4, size=t_max, dtype=np.uint8)
        seen_u = {(0, 0, 0)}
        seen_v = {(0, 0, 0)}
        common = 1
        xu = yu = zu = 0
        xv = yv = zv = 0
        col = 0
        for t in range(t_max + 1):
            if t == times[col]:
                values[i, col] = common
                col += 1
            if t == t_max:
                break
            g = gu[t]
            if g == 0:
                zu -= yu
                xu += 1
            elif g == 1:
                zu += yu
                xu -= 1
            elif g == 2:
                yu += 1
            else:
                yu -= 1
            p = (xu, yu, zu)
            if p not in seen_u:
                seen_u.add(p)
                if p in seen_v:
                    common += 1
            g = gv[t]
            if g == 0:
                zv -= yv
                xv += 1
            elif g == 1:
                zv += yv
                xv -= 1
            elif g == 2:
                yv += 1
            else:
                yv -= 1
            p = (xv, yv, zv)
            if p not in seen_v:
                seen_v.add(p)
                if p in seen_u:
                    common += 1
        if col < len(times):
            values[i, col:] = common
    means = values.mean(axis=0)
    ses = values.std(axis=0, ddof=1) / math.sqrt(samples)
    return IntersectionGrowth(times, means, ses, values)
