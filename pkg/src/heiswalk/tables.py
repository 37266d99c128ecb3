"""Exact joint law of (count, weighted count) for fair 0/1 words.

For a word of k independent fair bits alpha_0..alpha_{k-1}, the table
holds the joint distribution of

    S = sum_j alpha_j        (number of ones)
    W = sum_j j * alpha_j    (position-weighted sum)

as a dense (k+1) x (k(k-1)/2 + 1) float64 matrix built by k convolution
steps, one bit per step, renormalized by 1/2 each step (exact: powers of
two).  Two words of length k land on the same Cayley-graph vertex exactly
when their (S, W) pairs agree, so every endpoint-collision statistic for
oriented walk pairs is a quadratic functional of this table:

    collision_probability      sum over (s,w) of mass^2
    count_match_probability    sum over s of (S-marginal)^2
    weighted_match_probability sum over w of (W-marginal)^2
    max_point_mass             max of the W-marginal

Memory is the binding constraint, roughly 4(k^3) bytes (k=512 is ~540 MB);
build_table refuses k above a cap, default 512, overridable with the
HEISWALK_TABLE_CAP environment variable.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import CapExceededError

__all__ = [
    "CountWeightTable",
    "TableStatistics",
    "build_table",
    "iter_tables",
    "scan_statistics",
    "table_cap",
    "collision_probability",
    "count_match_probability",
    "weighted_match_probability",
    "max_point_mass",
    "conditional_match_probability",
    "conditional_match_at_count",
    "dyadic_uniformity",
    "weight_bounds",
]

DEFAULT_TABLE_CAP = 512
_CAP_ENV = "HEISWALK_TABLE_CAP"


def table_cap() -> int:
    """Largest allowed k, from HEISWALK_TABLE_CAP or the built-in default."""
    raw = os.environ.get(_CAP_ENV)
    if raw is None:
        return DEFAULT_TABLE_CAP
    try:
        cap = int(raw)
    except ValueError as exc:
        raise ValueError(f"{_CAP_ENV} must be an integer, got {raw!r}") from exc
    if cap < 1:
        raise ValueError(f"{_CAP_ENV} must be positive, got {cap}")
    return cap


def weight_bounds(k: int, s: int) -> tuple[int, int]:
    """Smallest and largest weighted sum achievable with s ones in k slots."""
    return s * (s - 1) // 2, s * (2 * k - s - 1) // 2


@dataclass
class CountWeightTable:
    """Joint law of (S, W); mass[s, w] = P[S == s, W == w]."""

    k: int
    mass: np.ndarray

    def s_marginal(self) -> np.ndarray:
        return self.mass.sum(axis=1)

    def w_marginal(self) -> np.ndarray:
        return self.mass.sum(axis=0)


def _check_cap(k: int) -> None:
    if k < 1:
        raise ValueError("k must be >= 1")
    cap = table_cap()
    if k > cap:
        raise CapExceededError(
            f"k={k} exceeds the table cap {cap}; raise {_CAP_ENV} to allow more memory"
        )


def _advance(mass: np.ndarray, j: int) -> None:
    """Add bit j (weight j) to the table in place: new = avg(stay, shift).

    The shift moves (s, w) -> (s+1, w+j); iterating s downward keeps the
    source row s-1 untouched until it is read.  Before the step rows
    0..j hold the length-j table; afterwards rows 0..j+1 hold length j+1.
    """
    for s in range(j + 1, 0, -1):
        lo_src, hi_src = weight_bounds(j, s - 1)
        lo_new = s * (s - 1) // 2
        # stay part: whole reachable span of the new row (untouched cells are 0)
        mass[s, lo_new : hi_src + j + 1] *= 0.5
        mass[s, lo_src + j : hi_src + j + 1] += 0.5 * mass[s - 1, lo_src : hi_src + 1]
    mass[0, 0] *= 0.5


def iter_tables(k_max: int) -> Iterator[CountWeightTable]:
    """Yield the table for k = 1, 2, ..., k_max.

    The yielded tables share one growing buffer; each is a read-only view
    valid until the next iteration.  Copy the mass to keep it.
    """
    _check_cap(k_max)
    w_size = k_max * (k_max - 1) // 2 + 1
    mass = np.zeros((k_max + 1, w_size), dtype=np.float64)
    mass[0, 0] = 0.5
    mass[1, 0] = 0.5
    view = mass[:2, :1]
    view.flags.writeable = False
    yield CountWeightTable(1, view)
    for j in range(1, k_max):
        _advance(mass, j)
        k = j + 1
        view = mass[: k + 1, : k * (k - 1) // 2 + 1]
        view.flags.writeable = False
        yield CountWeightTable(k, view)


def build_table(k: int) -> CountWeightTable:
    """Exact (S, W) table for word length k."""
    for table in iter_tables(k):
        pass
    return table


@dataclass(frozen=True)
class TableStatistics:
    k: int
    collision: float
    count_match: float
    weighted_match: float
    max_point_mass: float
    conditional_match: float


def _statistics(table: CountWeightTable) -> TableStatistics:
    m = table.mass
    s_marg = m.sum(axis=1)
    w_marg = m.sum(axis=0)
    flat = m.ravel()
    collision = float(flat @ flat)
    row_sq = np.einsum("sw,sw->s", m, m)
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = np.where(s_marg > 0, row_sq / s_marg, 0.0)
    return TableStatistics(
        k=table.k,
        collision=collision,
        count_match=float(s_marg @ s_marg),
        weighted_match=float(w_marg @ w_marg),
        max_point_mass=float(w_marg.max()),
        conditional_match=float(cond.sum()),
    )


def scan_statistics(k_values) -> dict[int, TableStatistics]:
    """Statistics at each requested k from a single incremental build."""
    wanted = {int(k) for k in k_values}
    if not wanted:
        return {}
    out: dict[int, TableStatistics] = {}
    for table in iter_tables(max(wanted)):
        if table.k in wanted:
            out[table.k] = _statistics(table)
    return out


def _as_table(k_or_table) -> CountWeightTable:
    if isinstance(k_or_table, CountWeightTable):
        return k_or_table
    return build_table(int(k_or_table))


def collision_probability(k_or_table) -> float:
    """P[two independent words of length k share both S and W]."""
    m = _as_table(k_or_table).mass.ravel()
    return float(m @ m)


def count_match_probability(k_or_table) -> float:
    """P[equal counts]; equals C(2k, k) / 4^k."""
    s = _as_table(k_or_table).s_marginal()
    return float(s @ s)


def weighted_match_probability(k_or_table) -> float:
    """P[equal weighted sums], ignoring counts."""
    w = _as_table(k_or_table).w_marginal()
    return float(w @ w)


def max_point_mass(k_or_table) -> float:
    """Largest single point mass of the weighted sum W."""
    return float(_as_table(k_or_table).w_marginal().max())


def conditional_match_probability(k_or_table) -> float:
    """Average over s of P[equal weighted sums | both counts equal s].

    Computed as sum_s P[S=s] * sum_w P[W=w|S=s]^2, the match probability
    when the common count is drawn from the count law itself.
    """
    t = _as_table(k_or_table)
    s_marg = t.s_marginal()
    row_sq = np.einsum("sw,sw->s", t.mass, t.mass)
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = np.where(s_marg > 0, row_sq / s_marg, 0.0)
    return float(cond.sum())


def conditional_match_at_count(k_or_table, s: int | None = None) -> float:
    """P[equal weighted sums | both counts equal s]; s defaults to round(k/2)."""
    t = _as_table(k_or_table)
    if s is None:
        s = t.k // 2
    if not 0 <= s <= t.k:
        raise ValueError(f"count s={s} outside 0..{t.k}")
    row = t.mass[s]
    total = row.sum()
    if total == 0.0:
        raise ValueError(f"count s={s} has zero probability")
    p = row / total
    return float(p @ p)


def dyadic_uniformity(k: int) -> tuple[int, bool]:
    """Support size and exact uniformity of the dyadic sub-sum of W.

    Restrict W to the bit positions 2^0, 2^1, ..., 2^(m-1) with
    m = floor(log2 k).  Those weights are distinct powers of two, so the
    sub-sum should be exactly uniform on {0, ..., 2^m - 1}; this computes
    the law by convolution and checks rather than assumes it.
    """
    if k < 2:
        raise ValueError("k must be >= 2 so that some dyadic position exists")
    m = int(math.floor(math.log2(k)))
    law = np.array([1.0])
    for j in range(m):
        w = 1 << j
        nxt = np.zeros(law.size + w)
        nxt[: law.size] += 0.5 * law
        nxt[w:] += 0.5 * law
        law = nxt
    support = int(np.count_nonzero(law))
    uniform = support == law.size and bool(np.all(law == law[0]))
    return support, uniform
