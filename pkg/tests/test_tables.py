"""Exact count/weight DP against exhaustive word enumeration."""

import math

import numpy as np
import pytest

from heiswalk.errors import CapExceededError
from heiswalk.tables import (
    CountWeightTable,
    build_table,
    collision_probability,
    conditional_match_at_count,
    conditional_match_probability,
    count_match_probability,
    dyadic_uniformity,
    iter_tables,
    max_point_mass,
    scan_statistics,
    table_cap,
    weight_bounds,
)


def brute_table(k):
    """Oracle: enumerate all 2^k words and tally (count, weight) exactly.

    Every probability is count / 2^k with a small integer numerator, so
    the float table must match bit for bit.
    """
    idx = np.arange(2**k, dtype=np.uint32)
    bits = (idx[:, None] >> np.arange(k, dtype=np.uint32)) & 1
    s = bits.sum(axis=1)
    w = bits @ np.arange(k, dtype=np.uint64)
    n_w = k * (k - 1) // 2 + 1
    counts = np.zeros((k + 1, n_w), dtype=np.int64)
    np.add.at(counts, (s.astype(np.int64), w.astype(np.int64)), 1)
    return CountWeightTable(k, counts / float(2**k))


@pytest.mark.parametrize("k", [1, 2, 3, 5, 8, 11])
def test_dp_equals_enumeration_exactly(k):
    dp = build_table(k)
    brute = brute_table(k)
    assert dp.mass.shape == brute.mass.shape
    assert np.array_equal(dp.mass, brute.mass)


def test_collision_spot_values():
    assert collision_probability(1) == 0.5
    assert collision_probability(2) == 0.25
    assert collision_probability(3) == 0.125
    assert collision_probability(4) == 9 / 128


def test_conditional_spot_values():
    assert conditional_match_probability(1) == 1.0
    assert conditional_match_probability(2) == 0.75
    assert conditional_match_at_count(2, 0) == 1.0
    assert conditional_match_at_count(2, 1) == 0.5
    # default count is k//2
    t = build_table(8)
    assert conditional_match_at_count(t) == conditional_match_at_count(t, 4)


def test_count_match_is_central_binomial():
    for k in (1, 2, 5, 10, 20):
        exact = math.comb(2 * k, k) / 4**k
        assert count_match_probability(k) == exact


def test_mass_is_a_probability_law():
    t = build_table(32)
    assert t.mass.min() >= 0.0
    assert t.mass.sum() == pytest.approx(1.0, abs=1e-12)
    assert float(t.s_marginal().sum()) == pytest.approx(1.0, abs=1e-12)


def test_weight_bounds_delimit_support():
    t = build_table(12)
    for s in range(13):
        lo, hi = weight_bounds(12, s)
        row = t.mass[s]
        support = np.flatnonzero(row)
        assert support[0] == lo and support[-1] == hi
        # nothing outside the bounds
        assert row[:lo].sum() == 0.0 and row[hi + 1 :].sum() == 0.0


def test_reversal_symmetry():
    # reversing a word maps weight w to s*(k-1) - w, so each count row is
    # symmetric across its own support [lo, hi] (lo + hi = s*(k-1))
    t = build_table(9)
    for s in range(10):
        lo, hi = weight_bounds(9, s)
        span = t.mass[s, lo : hi + 1]
        assert np.array_equal(span, span[::-1])


def test_iter_tables_prefix_consistency():
    # yielded views share one buffer: snapshot each before advancing
    masses = {t.k: t.mass.copy() for t in iter_tables(6)}
    assert sorted(masses) == list(range(1, 7))
    for k, mass in masses.items():
        assert np.array_equal(mass, build_table(k).mass)


def test_iter_tables_views_are_read_only():
    for t in iter_tables(3):
        with pytest.raises(ValueError):
            t.mass[0, 0] = 1.0


def test_statistics_agree_with_direct_formulas():
    stats = scan_statistics([7, 16])[16]
    t = build_table(16)
    assert stats.collision == float(np.sum(t.mass**2))
    assert stats.count_match == float(np.sum(t.s_marginal() ** 2))
    assert stats.weighted_match == float(np.sum(t.w_marginal() ** 2))
    assert stats.max_point_mass == max_point_mass(t)
    assert stats.conditional_match == conditional_match_probability(t)


def test_point_mass_and_match_bounds():
    for k in (2, 3, 17, 64):
        assert max_point_mass(k) <= 1.0 / k + 1e-12
        assert collision_probability(k) <= count_match_probability(k)
        assert collision_probability(k) <= max_point_mass(k)


def test_dyadic_uniformity_cases():
    assert dyadic_uniformity(4) == (4, True)
    assert dyadic_uniformity(8) == (8, True)
    assert dyadic_uniformity(16) == (16, True)
    assert dyadic_uniformity(31) == (16, True)
    assert dyadic_uniformity(256) == (256, True)
    assert dyadic_uniformity(1000) == (512, True)
    for k in (4, 8, 16, 31, 256, 1000):
        support, uniform = dyadic_uniformity(k)
        assert uniform and support >= k / 2 - 1


def test_cap_env_override(monkeypatch):
    monkeypatch.setenv("HEISWALK_TABLE_CAP", "8")
    assert table_cap() == 8
    build_table(8)
    with pytest.raises(CapExceededError):
        build_table(9)
    monkeypatch.setenv("HEISWALK_TABLE_CAP", "banana")
    with pytest.raises(ValueError):
        table_cap()
    monkeypatch.setenv("HEISWALK_TABLE_CAP", "0")
    with pytest.raises(ValueError):
        table_cap()


def test_k_validation():
    with pytest.raises(ValueError):
        build_table(0)
