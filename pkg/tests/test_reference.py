"""Lattice reference models: exact DP values, renewal identities, SRW."""

import math

import numpy as np
import pytest

from heiswalk.errors import CapExceededError
from heiswalk.heisenberg import Generator, word_eval
from heiswalk.reference import (
    difference_walk_return_by,
    edge_collision_rate,
    lazy_return_probability,
    srw_mutual_intersections,
    srw_return_probability,
    srw_return_profile,
    theta_d_estimate,
    zd_collision_probability,
    zd_eit_tail,
)


def test_zd_collision_degenerate_dimension():
    # one letter: both words are forced, so they always collide
    for k in (0, 1, 7, 30):
        assert zd_collision_probability(1, k) == 1.0


def test_zd_collision_two_letters_closed_form():
    # endpoint reduces to the letter count: central binomial over 4^k
    for k in (1, 2, 5, 12, 30):
        assert zd_collision_probability(2, k) == pytest.approx(
            math.comb(2 * k, k) / 4**k, rel=1e-15
        )


def test_zd_collision_brute_force_d4():
    assert zd_collision_probability(4, 0) == 1.0
    assert zd_collision_probability(4, 1) == 0.25
    assert zd_collision_probability(4, 2) == 28 / 256


def test_zd_collision_monotone():
    vals_k = [zd_collision_probability(4, k) for k in (1, 2, 4, 8, 16, 32)]
    assert all(a > b for a, b in zip(vals_k, vals_k[1:]))
    vals_d = [zd_collision_probability(d, 8) for d in (2, 3, 4, 5)]
    assert all(a > b for a, b in zip(vals_d, vals_d[1:]))


def test_zd_collision_cap():
    with pytest.raises(CapExceededError):
        zd_collision_probability(4, 5000)


def test_renewal_identities():
    assert lazy_return_probability(4, 0.0) == 0.25
    assert edge_collision_rate(4, 0.0) == 0.25
    assert lazy_return_probability(4, 1.0) == 1.0
    assert edge_collision_rate(4, 1.0) == pytest.approx(1.0)
    for theta in (0.1, 0.25, 0.5, 0.9):
        lazy = lazy_return_probability(4, theta)
        edge = edge_collision_rate(4, theta)
        # geometric runs of shared edges: rate solves r = (1/d) / (1 - (lazy - 1/d))
        assert edge == pytest.approx(0.25 / (1 - (lazy - 0.25)), rel=1e-14)
        assert edge < lazy < 1.0


def test_difference_walk_hand_values():
    # first displacement, then an immediate cancellation
    assert difference_walk_return_by(2, 2) == pytest.approx(1 / 8, abs=1e-15)
    assert difference_walk_return_by(4, 2) == pytest.approx(3 / 64, abs=1e-15)
    assert difference_walk_return_by(4, 1) == 0.0


def test_difference_walk_monotone_in_horizon():
    vals = [difference_walk_return_by(4, h) for h in (2, 4, 8, 16, 32)]
    assert all(a < b for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 0.3


def test_theta_estimate_matches_exact_dp():
    horizon = 24
    theta, bound = theta_d_estimate(4, horizon, 60_000, seed=13)
    exact = difference_walk_return_by(4, horizon)
    se = math.sqrt(exact * (1 - exact) / 60_000)
    assert abs(theta - exact) < 4 * se
    assert bound > 0


def test_theta_estimate_monotone_in_horizon_pathwise():
    values = [theta_d_estimate(4, h, 10_000, seed=3)[0] for h in (4, 16, 64, 256)]
    assert all(a <= b for a, b in zip(values, values[1:]))


def test_theta_estimate_deterministic_and_thread_invariant():
    a = theta_d_estimate(4, 64, 40_000, seed=2, threads=1)
    b = theta_d_estimate(4, 64, 40_000, seed=2, threads=4)
    assert a == b


def test_theta_censoring_infinite_in_low_dimension():
    _, bound = theta_d_estimate(3, 32, 2000, seed=1)
    assert bound == math.inf
    _, bound4 = theta_d_estimate(4, 32, 2000, seed=1)
    assert np.isfinite(bound4)


def test_srw_return_spot_values():
    assert srw_return_probability(0) == 1.0
    assert srw_return_probability(2) == 0.25
    assert srw_return_probability(4) == pytest.approx(28 / 256, abs=1e-15)
    for t in (1, 3, 5, 7):
        assert srw_return_probability(t) == 0.0


def test_srw_return_matches_word_enumeration():
    # all 4^6 generator words, exact probabilities
    import itertools

    gens = list(Generator)
    profile = srw_return_profile(6)
    for t in (2, 4, 6):
        hits = sum(
            1
            for word in itertools.product(gens, repeat=t)
            if word_eval(word) == (0, 0, 0)
        )
        assert profile.probabilities[t] == pytest.approx(hits / 4**t, abs=1e-12)


def test_srw_profile_mass_accounting():
    profile = srw_return_profile(32)
    assert profile.dropped_mass < 1e-9
    probs = profile.probabilities[::2]
    assert all(a > b for a, b in zip(probs[1:], probs[2:]))


def test_srw_time_cap():
    with pytest.raises(CapExceededError):
        srw_return_profile(1000)


def test_intersection_growth_basics():
    growth = srw_mutual_intersections(16, 300, seed=8, num_doublings=2)
    assert list(growth.times) == [0, 16, 32, 64]
    assert growth.means[0] == 1.0
    # common-vertex sets only grow along each sample path
    assert np.all(np.diff(growth.values, axis=1) >= 0)
    assert growth.values.shape == (300, 4)
    z = growth.growth_z()
    assert np.isfinite(z) and z > 0


def test_intersection_growth_deterministic():
    a = srw_mutual_intersections(8, 100, seed=5)
    b = srw_mutual_intersections(8, 100, seed=5)
    assert np.array_equal(a.values, b.values)


def test_zd_eit_tail_structure():
    est = zd_eit_tail(4, 128, 4000, seed=17)
    assert est.counts[0] == 4000
    tail = [est.counts[n] for n in sorted(est.counts)]
    assert all(a >= b for a, b in zip(tail, tail[1:]))
    for n, c in est.counts.items():
        assert est.vertex_counts.get(n, 0) >= c
    assert est.censoring_bound == pytest.approx(128**-0.5 / 0.5, rel=1e-12)


def test_zd_eit_excursion_ratio_estimates_theta():
    # the fresh re-meet tail is geometric with the embedded return rate;
    # later excursions see a shorter remaining horizon, so the finite-h
    # ratio is bracketed by the half- and full-horizon exact values
    est = zd_eit_tail(4, 48, 30_000, seed=23)
    c1, c2 = est.excursion_counts[1], est.excursion_counts[2]
    ratio = c2 / c1
    se = math.sqrt(ratio * (1 - ratio) / c1)
    assert difference_walk_return_by(4, 24) - 4 * se < ratio
    assert ratio < difference_walk_return_by(4, 48) + 4 * se


def test_zd_eit_validation():
    with pytest.raises(ValueError):
        zd_eit_tail(1, 16, 100, seed=1)
