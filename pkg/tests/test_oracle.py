import numpy as np
import pytest

from conftest import pair_from_edges, random_pair
from percmatch.graph import ParameterError
from percmatch.oracle import build_pairs_graph, run_pgm_reference
from percmatch.pgm import run_pgm


def test_single_edge_pairs_graph():
    pg = build_pairs_graph(pair_from_edges(2, [[0, 1]], [[0, 1]]))
    assert pg.edges() == {frozenset({(0, 0), (1, 1)}), frozenset({(0, 1), (1, 0)})}


def test_edgeless_pairs_graph():
    assert build_pairs_graph(pair_from_edges(5, [], [])).num_edges() == 0


def test_edge_count_identity():
    pair = random_pair(10, 4, 0.9, 3)
    m1, m2 = pair.g1.num_edges, pair.g2.num_edges
    # every (E1 edge, E2 edge) combination gives two distinct pairs-graph edges
    assert build_pairs_graph(pair).num_edges() == 2 * m1 * m2


def test_size_guard():
    with pytest.raises(ParameterError):
        build_pairs_graph(random_pair(201, 2, 1.0, 0))


def test_all_seeds_and_unreachable_threshold():
    pair = random_pair(20, 5, 0.9, 1)
    pg = build_pairs_graph(pair)
    good = [(a, int(pair.truth[a])) for a in range(20)]
    assert run_pgm_reference(pg, good, 2) == set(good)
    few = good[:3]
    assert run_pgm_reference(pg, few, 10**6) == set(few)


@pytest.mark.parametrize("fifo", [False, True])
def test_engine_matches_reference(fifo):
    rng = np.random.default_rng(7)
    for t in range(60):
        n = int(rng.integers(4, 25))
        pair = random_pair(n, float(rng.uniform(2, 8)), float(rng.choice([0.5, 0.7, 0.9, 1.0])), t)
        r = int(rng.integers(2, 5))
        a0 = int(rng.integers(0, n + 1))
        seeds = [(a, int(pair.truth[a])) for a in rng.choice(n, a0, replace=False)]
        ref = run_pgm_reference(build_pairs_graph(pair), seeds, r, rng_seed=t, fifo=fifo)
        assert run_pgm(pair, seeds, r, rng_seed=t, fifo=fifo).matched == ref
