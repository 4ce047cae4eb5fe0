"""Percolation graph matching (PGM) over the implicit pairs graph."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import _kernels
from .graph import ObservedPair, ParameterError


class SeedError(ValueError):
    pass


class VertexPair(NamedTuple):
    a: int  # G1 vertex
    b: int  # G2 vertex


def is_good(pair: VertexPair, truth) -> bool:
    return int(truth[pair.a]) == pair.b


def _as_arrays(seeds) -> tuple[np.ndarray, np.ndarray]:
    ordered = sorted({(int(a), int(b)) for a, b in seeds})
    if not ordered:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    arr = np.asarray(ordered, dtype=np.int64)
    return arr[:, 0].copy(), arr[:, 1].copy()


def check_seeds(seeds, n1: int, n2: int) -> list[VertexPair]:
    """Sorted, validated seed list; raises SeedError on conflicts or bad ids."""
    out = sorted({VertexPair(int(a), int(b)) for a, b in seeds})
    seen1, seen2 = set(), set()
    for p in out:
        if not (0 <= p.a < n1 and 0 <= p.b < n2):
            raise SeedError(f"seed {tuple(p)} out of range")
        if p.a in seen1 or p.b in seen2:
            raise SeedError(f"conflicting seed {tuple(p)}")
        seen1.add(p.a)
        seen2.add(p.b)
    return out


@dataclass
class SeedPolicy:
    mode: str = "uniform"  # uniform | degree_window | explicit
    count: int = 0
    window: tuple[float, float] | None = None
    rng_seed: int = 0
    pairs: list | None = None


def select_seeds(pair: ObservedPair, policy: SeedPolicy) -> list[VertexPair]:
    """Draw ``policy.count`` good pairs.

    ``degree_window`` tests the observed G1 degree against the window, which
    defaults to [sqrt(n)/2, sqrt(n)].
    """
    if policy.mode == "explicit":
        return check_seeds(policy.pairs or [], pair.g1.n, pair.g2.n)
    n = pair.n
    if policy.mode == "uniform":
        eligible = np.arange(n)
    elif policy.mode == "degree_window":
        lo, hi = policy.window or (math.sqrt(n) / 2, math.sqrt(n))
        deg = pair.g1.degrees()
        eligible = np.flatnonzero((deg >= lo) & (deg <= hi))
    else:
        raise ParameterError(f"unknown seed policy {policy.mode!r}")
    if policy.count < 0:
        raise SeedError("seed count must be non-negative")
    if policy.count > eligible.size:
        raise SeedError(f"requested {policy.count} seeds but only {eligible.size} pairs are eligible")
    rng = np.random.default_rng(np.random.SeedSequence([int(policy.rng_seed), 11]))
    chosen = rng.choice(eligible, size=policy.count, replace=False)
    return sorted(VertexPair(int(a), int(pair.truth[a])) for a in chosen)


@dataclass
class MatchState:
    """Outcome of a matching run, pairs listed in admission order (seeds first)."""
    n1: int
    n2: int
    pair_a: np.ndarray
    pair_b: np.ndarray
    is_seed: np.ndarray
    marks_at_match: np.ndarray
    step_index: np.ndarray
    processed_count: int
    r: int
    table_size: int = 0
    stage: np.ndarray | None = field(default=None, repr=False)

    @property
    def matched(self) -> set[VertexPair]:
        return {VertexPair(int(a), int(b)) for a, b in zip(self.pair_a, self.pair_b)}

    def __len__(self):
        return int(self.pair_a.size)

    def used(self) -> tuple[np.ndarray, np.ndarray]:
        u1 = np.zeros(self.n1, dtype=bool)
        u2 = np.zeros(self.n2, dtype=bool)
        u1[self.pair_a] = True
        u2[self.pair_b] = True
        return u1, u2


class _Buffers:
    """Preallocated frontier and output arrays shared by the percolation kernels."""

    def __init__(self, n1, n2, groups):
        cap = min(n1, n2)
        n_init = sum(len(g) for g in groups)
        n_groups = len(groups)
        self.grp_a = np.empty(n_init + cap, dtype=np.int64)
        self.grp_b = np.empty(n_init + cap, dtype=np.int64)
        self.grp_start = np.zeros(n_groups + cap + 1, dtype=np.int64)
        k = 0
        for gi, g in enumerate(groups):
            for a, b in g:
                self.grp_a[k] = a
                self.grp_b[k] = b
                k += 1
            self.grp_start[gi + 1] = k
        self.n_groups = n_groups
        self.out_a = np.empty(cap, dtype=np.int64)
        self.out_b = np.empty(cap, dtype=np.int64)
        self.out_marks = np.empty(cap, dtype=np.int64)
        self.out_step = np.empty(cap, dtype=np.int64)
        self.max_pops = n_groups + cap


_DUMMY_I = np.zeros(1, dtype=np.int32)
_DUMMY_U = np.zeros(1, dtype=np.uint8)


def frontier_uniforms(rng_seed: int, size: int) -> np.ndarray:
    """The uniform stream that drives random frontier selection."""
    rng = np.random.default_rng(np.random.SeedSequence([int(rng_seed), 7]))
    return rng.random(size)


def percolate_groups(pair: ObservedPair, groups, used1, used2, r, uniforms, fifo=False,
                     mode=0, slices=None, target=1, kmin=0, t0=0):
    """Run the percolation kernel from ``groups``; mutates ``used1``/``used2``.

    Returns (a, b, marks, step, pops, table_size) for the newly admitted pairs.
    """
    g1, g2 = pair.g1, pair.g2
    buf = _Buffers(g1.n, g2.n, groups)
    if uniforms is None or uniforms.size < buf.max_pops:
        raise ParameterError("frontier uniform stream too short")
    if slices is None:
        sl1 = sl2 = _DUMMY_I
        in1 = in2 = hi1 = hi2 = _DUMMY_U
    else:
        sl1, sl2, in1, in2, hi1, hi2 = slices
    hint = max(1024, 4 * sum(len(g) for g in groups))
    n_out, pops, size = _kernels.percolate(
        g1.indptr, g1.indices, g2.indptr, g2.indices, used1, used2,
        mode, sl1, sl2, in1, in2, hi1, hi2, target, kmin,
        buf.grp_a, buf.grp_b, buf.grp_start, buf.n_groups, int(r), uniforms, bool(fifo),
        buf.out_a, buf.out_b, buf.out_marks, buf.out_step, 0, t0, hint)
    return (buf.out_a[:n_out].copy(), buf.out_b[:n_out].copy(), buf.out_marks[:n_out].copy(),
            buf.out_step[:n_out].copy(), pops, size)


def run_pgm(pair: ObservedPair, seeds, r: int = 4, rng_seed: int = 0,
            fifo: bool = False) -> MatchState:
    """Percolation graph matching from ``seeds`` with threshold ``r``.

    Frontier pairs are popped uniformly at random using the stream from
    ``frontier_uniforms(rng_seed, ...)``. Pairs reaching ``r`` marks in a pop
    are admitted in ascending (a, b) order unless they conflict with a
    matched pair; they are never retried.
    """
    if r < 1:
        raise ParameterError(f"threshold r must be >= 1, got {r}")
    g1, g2 = pair.g1, pair.g2
    seeds = check_seeds(seeds, g1.n, g2.n)
    used1 = np.zeros(g1.n, dtype=np.uint8)
    used2 = np.zeros(g2.n, dtype=np.uint8)
    for a, b in seeds:
        used1[a] = 1
        used2[b] = 1
    groups = [[s] for s in seeds]
    uniforms = frontier_uniforms(rng_seed, len(groups) + min(g1.n, g2.n))
    a, b, marks, step, pops, size = percolate_groups(pair, groups, used1, used2, r, uniforms, fifo)
    sa, sb = _as_arrays(seeds)
    k = sa.size
    return MatchState(
        n1=g1.n, n2=g2.n,
        pair_a=np.concatenate([sa, a]), pair_b=np.concatenate([sb, b]),
        is_seed=np.concatenate([np.ones(k, bool), np.zeros(a.size, bool)]),
        marks_at_match=np.concatenate([np.zeros(k, np.int64), marks]),
        step_index=np.concatenate([np.zeros(k, np.int64), step]),
        processed_count=int(pops), r=int(r), table_size=int(size))


def classify_matches(state: MatchState, truth) -> tuple[int, int, int]:
    """(good, bad, unmatched) where unmatched = n - good - bad."""
    truth = np.asarray(truth)
    good = int(np.count_nonzero(truth[state.pair_a] == state.pair_b))
    bad = len(state) - good
    return good, bad, int(truth.size) - good - bad


def write_matches_csv(state: MatchState, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["g1_id", "g2_id", "is_seed", "marks_at_match", "step_index"])
        for row in zip(state.pair_a.tolist(), state.pair_b.tolist(), state.is_seed.astype(int).tolist(),
                       state.marks_at_match.tolist(), state.step_index.tolist()):
            w.writerow(row)


def read_matches_csv(path) -> list[tuple[int, int, int, int, int]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return [tuple(int(x) for x in row) for row in rows[1:]]
