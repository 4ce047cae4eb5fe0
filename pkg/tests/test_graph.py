import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from percmatch.graph import (Graph, ParameterError, WeightedGraphSpec, calibrate_w_bar,
                             chung_lu_from_weights, default_i0, generate_chung_lu, generate_gnp,
                             sample_observed_pair)


def check_graph_invariants(g: Graph):
    assert g.indptr[0] == 0 and g.indptr[-1] == g.indices.size
    for i in range(g.n):
        nb = g.neighbors(i)
        assert i not in nb
        assert np.all(np.diff(nb) > 0)
        for j in nb:
            assert g.has_edge(int(j), i)


specs = st.builds(WeightedGraphSpec,
                  n=st.integers(2, 300),
                  beta=st.floats(2.05, 3.5),
                  w_bar=st.floats(0.5, 15),
                  rng_seed=st.integers(0, 2**32))


@given(specs)
def test_generated_graph_invariants(spec):
    check_graph_invariants(generate_chung_lu(spec))


@given(specs)
def test_weights_monotone_and_capped(spec):
    w = spec.weights()
    assert np.all(np.diff(w) <= 1e-12)
    assert w[0] <= math.sqrt(spec.n) * (1 + 1e-12)


@given(st.integers(2, 200), st.floats(2.05, 3.5), st.floats(0.5, 20))
def test_default_offset_is_smallest_integer(n, beta, w_bar):
    i0 = default_i0(n, beta, w_bar)
    c = w_bar * (beta - 2) / (beta - 1)
    assert c * (n / max(i0, 1e-300)) ** (1 / (beta - 1)) <= math.sqrt(n)
    if i0 > 1:
        assert c * (n / (i0 - 1)) ** (1 / (beta - 1)) > math.sqrt(n) * (1 - 1e-9)


@given(specs, st.floats(0, 1))
def test_determinism(spec, s):
    a, b = generate_chung_lu(spec), generate_chung_lu(spec)
    assert a.same_structure(b)
    p, q = sample_observed_pair(a, s, 5), sample_observed_pair(b, s, 5)
    assert p.g1.same_structure(q.g1) and p.g2.same_structure(q.g2)
    assert np.array_equal(p.truth, q.truth)


@given(specs, st.floats(0, 1), st.integers(0, 1000))
def test_observed_edges_come_from_ground(spec, s, seed):
    g = generate_chung_lu(spec)
    pair = sample_observed_pair(g, s, seed)
    assert sorted(pair.truth.tolist()) == list(range(g.n))
    inv = pair.inverse_truth()
    for u, v in pair.g1.edges():
        assert g.has_edge(int(u), int(v))
    for u, v in pair.g2.edges():
        assert g.has_edge(int(inv[u]), int(inv[v]))


def test_parameter_errors():
    with pytest.raises(ParameterError):
        WeightedGraphSpec(1, 2.5, 5)
    with pytest.raises(ParameterError):
        WeightedGraphSpec(10, 2.0, 5)
    with pytest.raises(ParameterError):
        sample_observed_pair(generate_gnp(10, 2, 0), 1.5)


def test_two_vertex_flat_weights_half_probability():
    hits = sum(chung_lu_from_weights([1.0, 1.0], seed).num_edges for seed in range(4000))
    assert abs(hits / 4000 - 0.5) < 3 * math.sqrt(0.25 / 4000)


def test_clamped_pairs_always_present():
    w = np.array([40.0, 40.0, 1.0, 1.0, 1.0, 1.0])  # 40*40 >= sum(w) = 84
    for seed in range(50):
        assert chung_lu_from_weights(w, seed).has_edge(0, 1)


def test_edge_marginals_small_instance():
    # exhaustive check of every pair's frequency against min(w_i w_j / W, 1)
    w = np.array([6.0, 4.0, 3.0, 2.0, 1.5, 1.0, 0.5])
    total = w.sum()
    reps = 3000
    counts = np.zeros((7, 7))
    for seed in range(reps):
        for u, v in chung_lu_from_weights(w, seed).edges():
            counts[u, v] += 1
    for i in range(7):
        for j in range(i + 1, 7):
            p = min(w[i] * w[j] / total, 1.0)
            sd = math.sqrt(p * (1 - p) / reps) + 1e-9
            assert abs(counts[i, j] / reps - p) <= 4.5 * sd


def test_sampling_extremes():
    g = generate_chung_lu(WeightedGraphSpec(500, 2.5, 6, rng_seed=1))
    full = sample_observed_pair(g, 1.0, 2)
    assert full.g1.same_structure(g)
    inv = full.inverse_truth()
    relabeled = Graph.from_edges(g.n, inv[full.g2.edges()])
    assert relabeled.same_structure(g)
    empty = sample_observed_pair(g, 0.0, 2)
    assert empty.g1.num_edges == 0 and empty.g2.num_edges == 0


def test_binomial_retention():
    # groundtruth with exactly 10^4 edges
    n = 20000
    e = np.stack([np.arange(0, n, 2), np.arange(1, n, 2)], axis=1)
    g = Graph.from_edges(n, e)
    assert g.num_edges == 10**4
    lo, hi = stats.binom.ppf([0.0005, 0.9995], 10**4, 0.5)
    inside = sum(lo <= sample_observed_pair(g, 0.5, t).g1.num_edges <= hi for t in range(1000))
    assert inside >= 990


def test_gnp_mean_degree_and_zero():
    assert generate_gnp(1000, 0.0, 1).num_edges == 0
    means = [generate_gnp(10**4, 25.64, t).degrees().mean() for t in range(10)]
    assert all(abs(m / 25.64 - 1) < 0.02 for m in means)


def test_calibrated_mean():
    w_bar = calibrate_w_bar(10**4, 2.9, 25)
    assert abs(WeightedGraphSpec(10**4, 2.9, w_bar).weights().mean() - 25) < 1e-6
