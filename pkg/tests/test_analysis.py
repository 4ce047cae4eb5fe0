import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from conftest import random_pair
from percmatch.analysis import (NoTransitionError, RunMetrics, TheoryParams, boundary_edges,
                                critical_seed_count, detect_transition, in_percolation_regime,
                                matchable_count, p1_seed_exponent)
from percmatch.graph import ParameterError
from percmatch.oracle import build_pairs_graph


def a_c_direct(n, p, s, r):
    return (1 - 1 / r) * (math.factorial(r - 1) / (n * (p * s * s) ** r)) ** (1 / (r - 1))


def test_critical_seed_count_examples():
    # n (p s^2)^4 = 6 and 24 with p = s = 1
    assert critical_seed_count(TheoryParams(6, 1.0, 1.0, 4)) == pytest.approx(0.75)
    assert critical_seed_count(TheoryParams(24, 1.0, 1.0, 4)) == pytest.approx(0.75 * 0.25 ** (1 / 3))
    assert critical_seed_count(TheoryParams(24, 1.0, 1.0, 4)) == pytest.approx(0.4725, abs=1e-4)


@given(st.integers(10, 10**7), st.floats(1e-5, 1), st.floats(0.1, 1), st.integers(2, 12))
def test_critical_seed_count_matches_direct(n, p, s, r):
    assert critical_seed_count(TheoryParams(n, p, s, r)) == pytest.approx(a_c_direct(n, p, s, r), rel=1e-9)


def test_large_r_is_finite():
    assert math.isfinite(critical_seed_count(TheoryParams(10**6, 1e-3, 0.5, 200)))


@given(st.integers(100, 10**6), st.floats(1e-4, 0.5), st.floats(0.2, 0.95), st.integers(2, 8),
       st.floats(1.01, 2))
def test_a_c_decreasing(n, p, s, r, f):
    base = critical_seed_count(TheoryParams(n, p, s, r))
    assume(p * f <= 1 and s * f <= 1)
    assert critical_seed_count(TheoryParams(n, p * f, s, r)) < base
    assert critical_seed_count(TheoryParams(n, p, s * f, r)) < base
    assert critical_seed_count(TheoryParams(int(n * f) + 1, p, s, r)) < base


def test_regime_flags():
    inside = in_percolation_regime(TheoryParams(10**6, 1e-4, 0.8, 8))
    assert inside["inside"]
    r4 = in_percolation_regime(TheoryParams(10**4, 2e-3, 0.8, 4))
    assert r4["lower"] and not r4["upper"]


def test_p1_exponent_examples():
    out = p1_seed_exponent(0.45, 2.5, 13)
    assert out["r_min"] == 13 and out["r_ok"]
    assert out["exponent"] == pytest.approx((0.1 * 13 + 0.675 - 1) / 12)
    assert out["exponent"] == pytest.approx(0.08125)
    # near gamma = 1/2 the exponent goes negative
    assert p1_seed_exponent(0.4999, 2.5, 13)["exponent"] < 0
    with pytest.raises(ParameterError):
        p1_seed_exponent(0.5, 2.5, 13)
    with pytest.raises(ParameterError):
        p1_seed_exponent(0.3, 3.2, 13)


@given(st.floats(0.26, 0.49), st.floats(2.01, 2.99), st.integers(2, 40))
def test_p1_exponent_monotone_in_r(g, b, r):
    # de/dr has the sign of gamma (beta - 3): the bound rises towards 1 - 2 gamma
    e0 = p1_seed_exponent(g, b, r)["exponent"]
    e1 = p1_seed_exponent(g, b, r + 1)["exponent"]
    assert e1 > e0
    assert e1 < 1 - 2 * g


def boundary_enumerate(pair, seeds):
    """Count (seed, non-seed) adjacencies over all n^2 pairs, one per ordered incidence."""
    pg = build_pairs_graph(pair)
    seeds = set(seeds)
    return sum(1 for s_ in seeds for q in pg.adj.get(s_, ()) if q not in seeds)


def test_boundary_trivial():
    pair = random_pair(12, 3, 1.0, 1)
    assert boundary_edges(pair, []) == 0
    d1, d2 = pair.g1.degrees(), pair.g2.degrees()
    a = int(np.argmax(d1))
    assert boundary_edges(pair, [(a, int(pair.truth[a]))]) == d1[a] * d2[pair.truth[a]]


@given(st.integers(2, 15), st.floats(1, 8), st.sampled_from([0.6, 1.0]), st.integers(0, 10**5),
       st.integers(0, 15))
def test_boundary_matches_enumeration(n, d, s, seed, a0):
    pair = random_pair(n, d, s, seed)
    rng = np.random.default_rng(seed)
    a0 = min(a0, n)
    a = rng.choice(n, a0, replace=False)
    b = rng.permutation(n)[:a0]  # arbitrary, possibly bad, pairs
    seeds = list(zip(a.tolist(), b.tolist()))
    assert boundary_edges(pair, seeds) == boundary_enumerate(pair, seeds)


def test_detect_transition_examples():
    assert detect_transition([(1, 10), (2, 12), (4, 9000), (8, 9100)]) == 4
    with pytest.raises(NoTransitionError):
        detect_transition([(1, 10), (2, 11), (4, 12), (8, 13)])
    with pytest.raises(ParameterError):
        detect_transition([(1, 10), (2, 11), (4, 12)])
    # equal jumps: the smaller a0 wins
    assert detect_transition([(1, 1), (2, 100), (3, 10000), (4, 10001)]) == 2


@given(st.floats(2.0, 10.0), st.floats(1.0, 8.0))
def test_sigmoid_inflection(center, steep):
    # logistic in log(matched) against log2(a0), as on a log-log seed plot
    xs = np.arange(0, 13, 0.5)
    grid = 2.0 ** xs
    curve = [(float(a), math.exp(math.log(10) + math.log(1e4) / (1 + math.exp(-steep * (x - center)))))
             for a, x in zip(grid, xs)]
    found = math.log2(detect_transition(curve))
    assert abs(found - center) <= 0.5 + 1e-9


def test_run_metrics():
    m = RunMetrics(90, 10, 0, matchable=120)
    assert m.precision == 0.9 and m.bad_fraction == pytest.approx(0.1)
    assert m.recall == 0.75
    assert RunMetrics(0, 0, 5).precision == 1.0


def test_matchable_count():
    pair = random_pair(200, 6, 0.9, 3)
    d1 = pair.g1.degrees()
    d2 = pair.g2.degrees()
    expected = sum(1 for a in range(200) if d1[a] >= 4 and d2[pair.truth[a]] >= 4)
    assert matchable_count(pair) == expected
