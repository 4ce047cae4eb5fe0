import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_pair
from percmatch.graph import ParameterError, WeightedGraphSpec, generate_chung_lu, generate_gnp, sample_observed_pair
from percmatch.pgm import (SeedError, SeedPolicy, VertexPair, check_seeds, classify_matches, is_good,
                           read_matches_csv, run_pgm, select_seeds, write_matches_csv)


def replay_marks(pair, state):
    """Co-adjacent matched pairs of every matched pair, recounted from scratch."""
    partner = dict(zip(state.pair_a.tolist(), state.pair_b.tolist()))
    out = []
    for a, b in zip(state.pair_a.tolist(), state.pair_b.tolist()):
        nb2 = set(pair.g2.neighbors(b).tolist())
        out.append(sum(1 for u in pair.g1.neighbors(a).tolist() if partner.get(u) in nb2))
    return np.array(out)


instances = st.builds(lambda n, d, s, seed: random_pair(n, d, s, seed),
                      st.integers(5, 60), st.floats(1, 10), st.sampled_from([0.5, 0.8, 1.0]),
                      st.integers(0, 10**6))


@given(instances, st.integers(1, 5), st.integers(0, 60), st.integers(0, 100))
def test_conflict_free_and_sound(pair, r, a0, seed):
    a0 = min(a0, pair.n)
    seeds = select_seeds(pair, SeedPolicy(count=a0, rng_seed=seed))
    st_ = run_pgm(pair, seeds, r, rng_seed=seed)
    assert len(set(st_.pair_a.tolist())) == len(st_)
    assert len(set(st_.pair_b.tolist())) == len(st_)
    marks = replay_marks(pair, st_)
    assert np.all(marks[~st_.is_seed] >= r)
    assert st_.processed_count == len(st_)  # every matched pair is popped exactly once
    good, bad, unmatched = classify_matches(st_, pair.truth)
    assert good + bad == len(st_) and good + bad + unmatched == pair.n


@given(instances, st.integers(2, 4), st.integers(0, 10**6))
def test_determinism(pair, r, seed):
    seeds = select_seeds(pair, SeedPolicy(count=pair.n // 3, rng_seed=seed))
    a = run_pgm(pair, seeds, r, rng_seed=seed)
    b = run_pgm(pair, seeds, r, rng_seed=seed)
    for f in ("pair_a", "pair_b", "marks_at_match", "step_index"):
        assert np.array_equal(getattr(a, f), getattr(b, f))


def test_all_good_seeds():
    pair = random_pair(50, 5, 0.8, 2)
    seeds = [(a, int(pair.truth[a])) for a in range(50)]
    st_ = run_pgm(pair, seeds, 4)
    assert classify_matches(st_, pair.truth) == (50, 0, 0)
    assert st_.processed_count == 50


def test_empty_seeds():
    pair = random_pair(50, 5, 0.8, 2)
    st_ = run_pgm(pair, [], 4)
    assert len(st_) == 0 and classify_matches(st_, pair.truth) == (0, 0, 50)


def test_conflicting_seeds_rejected():
    pair = random_pair(10, 3, 1.0, 0)
    with pytest.raises(SeedError):
        run_pgm(pair, [(0, 1), (0, 2)], 4)
    with pytest.raises(SeedError):
        run_pgm(pair, [(0, 1), (3, 1)], 4)
    with pytest.raises(ParameterError):
        run_pgm(pair, [], 0)


def test_explicit_policy_normalizes_order():
    pair = random_pair(10, 3, 1.0, 0)
    out = select_seeds(pair, SeedPolicy("explicit", pairs=[(5, 1), (2, 7)]))
    assert out == [VertexPair(2, 7), VertexPair(5, 1)]


def test_degree_window_filter():
    g = generate_chung_lu(WeightedGraphSpec(10**4, 2.2, 12, rng_seed=1))
    pair = sample_observed_pair(g, 0.9, 1)
    deg = pair.g1.degrees()
    eligible = int(np.count_nonzero((deg >= 50) & (deg <= 100)))
    seeds = select_seeds(pair, SeedPolicy("degree_window", min(20, eligible), rng_seed=0))
    assert all(50 <= deg[a] <= 100 and is_good(p, pair.truth) for p in seeds for a in [p.a])
    with pytest.raises(SeedError, match=str(eligible)):
        select_seeds(pair, SeedPolicy("degree_window", eligible + 1))


def test_uniform_selection_frequencies():
    pair = random_pair(100, 3, 1.0, 0)
    counts = np.zeros(100)
    for t in range(10**4):
        counts[select_seeds(pair, SeedPolicy(count=1, rng_seed=t))[0].a] += 1
    sd = np.sqrt(10**4 * 0.01 * 0.99)
    # per-cell 3 sigma band; allow the handful of excursions a multinomial produces
    assert np.count_nonzero(np.abs(counts - 100) > 3 * sd) <= 2


def test_monotone_in_seed_count():
    g = generate_gnp(3000, 12, 4)
    means = []
    for a0 in (40, 80, 160, 320):
        vals = []
        for t in range(100):
            pair = sample_observed_pair(g, 0.8, t)
            seeds = select_seeds(pair, SeedPolicy(count=a0, rng_seed=t))
            vals.append(classify_matches(run_pgm(pair, seeds, 4, rng_seed=t), pair.truth)[0])
        means.append((np.mean(vals), np.std(vals) / 10))
    for (m0, e0), (m1, e1) in zip(means, means[1:]):
        assert m1 >= m0 - 3 * (e0 + e1)


def test_csv_round_trip(tmp_path):
    pair = random_pair(40, 6, 0.9, 1)
    st_ = run_pgm(pair, select_seeds(pair, SeedPolicy(count=10)), 2)
    write_matches_csv(st_, tmp_path / "m.csv")
    rows = read_matches_csv(tmp_path / "m.csv")
    assert [r[:2] for r in rows] == list(zip(st_.pair_a.tolist(), st_.pair_b.tolist()))
    assert (tmp_path / "m.csv").read_text().splitlines()[0] == "g1_id,g2_id,is_seed,marks_at_match,step_index"


@pytest.mark.slow
def test_large_sparse_run_memory():
    g = generate_gnp(10**6, 6, 1)
    pair = sample_observed_pair(g, 0.9, 1)
    seeds = select_seeds(pair, SeedPolicy(count=20000, rng_seed=1))
    st_ = run_pgm(pair, seeds, 4, rng_seed=1)
    d1, d2 = pair.g1.degrees(), pair.g2.degrees()
    total_marks = int((d1[st_.pair_a] * d2[st_.pair_b]).sum())
    assert st_.table_size <= total_marks
