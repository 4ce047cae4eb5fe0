"""Groundtruth graphs and the two-sided observation model.

Graphs are stored in CSR form: ``indptr`` (int64, length n+1) and ``indices``
(int32), with every neighbor list sorted and duplicate free.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np


class ParameterError(ValueError):
    """Raised when a model parameter is outside its valid range."""


def _seed32(rng_seed: int, *extra: int) -> int:
    # numba's generator takes a 32-bit seed
    ss = np.random.SeedSequence([int(rng_seed) & 0xFFFFFFFFFFFFFFFF, *extra])
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def default_i0(n: int, beta: float, w_bar: float) -> int:
    """Smallest integer offset keeping the largest weight at or below sqrt(n)."""
    c = w_bar * (beta - 2.0) / (beta - 1.0)
    i0 = n * (c / math.sqrt(n)) ** (beta - 1.0)
    i0 = math.ceil(i0 - 1e-9)
    # guard the rounding so weight(0) <= sqrt(n) holds exactly in floating point
    while c * (n / max(i0, 1e-300)) ** (1.0 / (beta - 1.0)) > math.sqrt(n):
        i0 += 1
    return max(i0, 0)


@dataclass(frozen=True)
class WeightedGraphSpec:
    n: int
    beta: float
    w_bar: float
    i0: float | None = None
    rng_seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise ParameterError(f"n must be >= 2, got {self.n}")
        if not self.beta > 2:
            raise ParameterError(f"beta must be > 2, got {self.beta}")
        if not self.w_bar > 0:
            raise ParameterError(f"w_bar must be > 0, got {self.w_bar}")
        if self.i0 is not None and self.i0 < 0:
            raise ParameterError(f"i0 must be >= 0, got {self.i0}")

    @property
    def offset(self) -> float:
        if self.i0 is None:
            return default_i0(self.n, self.beta, self.w_bar)
        return self.i0

    def weights(self) -> np.ndarray:
        """w_i = w_bar (beta-2)/(beta-1) (n/(i+i0))^(1/(beta-1)), i = 0..n-1."""
        i = np.arange(self.n, dtype=np.float64)
        c = self.w_bar * (self.beta - 2.0) / (self.beta - 1.0)
        with np.errstate(divide="ignore"):
            w = c * (self.n / (i + self.offset)) ** (1.0 / (self.beta - 1.0))
        if not np.isfinite(w[0]):
            raise ParameterError("i0 = 0 gives an infinite weight for vertex 0")
        return w


def calibrate_w_bar(n: int, beta: float, mean_degree: float, iters: int = 50) -> float:
    """w_bar whose realized weight mean (under the default i0) equals ``mean_degree``."""
    w_bar = mean_degree
    for _ in range(iters):
        realized = WeightedGraphSpec(n, beta, w_bar).weights().mean()
        w_bar *= mean_degree / realized
    return w_bar


@dataclass(frozen=True, eq=False)
class Graph:
    n: int
    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray | None = field(default=None, repr=False)

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def num_edges(self) -> int:
        return int(self.indices.size // 2)

    def edges(self) -> np.ndarray:
        """(m, 2) array of edges with u < v, in CSR order."""
        src = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees())
        dst = self.indices.astype(np.int64)
        keep = src < dst
        return np.stack([src[keep], dst[keep]], axis=1)

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.neighbors(u)
        k = np.searchsorted(nb, v)
        return bool(k < nb.size and nb[k] == v)

    def adjacency_lists(self) -> list[list[int]]:
        return [self.neighbors(i).tolist() for i in range(self.n)]

    def same_structure(self, other: "Graph") -> bool:
        return (self.n == other.n and np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.indices, other.indices))

    @classmethod
    def from_edges(cls, n: int, edges, weights=None) -> "Graph":
        """Build from an (m, 2) edge array; loops and duplicates are dropped."""
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if e.size and (e.min() < 0 or e.max() >= n):
            raise ParameterError("edge endpoint out of range")
        e = e[e[:, 0] != e[:, 1]]
        src = np.concatenate([e[:, 0], e[:, 1]])
        dst = np.concatenate([e[:, 1], e[:, 0]])
        key = np.unique(src * n + dst)
        src, dst = key // n, key % n
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
        w = None if weights is None else np.asarray(weights, dtype=np.float64)
        return cls(n, indptr, dst.astype(np.int32), w)


@dataclass(frozen=True, eq=False)
class ObservedPair:
    g1: Graph
    g2: Graph
    truth: np.ndarray  # truth[a] = G2 label of G1 vertex a
    s: float

    @property
    def n(self) -> int:
        return self.g1.n

    def inverse_truth(self) -> np.ndarray:
        inv = np.empty_like(self.truth)
        inv[self.truth] = np.arange(self.truth.size, dtype=self.truth.dtype)
        return inv


# ---------------------------------------------------------------- generators

@numba.njit(cache=True)
def _push(buf, k, u, v):
    if k >= buf.shape[0]:
        nb = np.empty((buf.shape[0] * 2, 2), dtype=np.int64)
        nb[:k] = buf[:k]
        buf = nb
    buf[k, 0] = u
    buf[k, 1] = v
    return buf


@numba.njit(cache=True)
def _chung_lu_edges(w, total, seed, cap):
    # w sorted non-increasing; skip geometric gaps under the current upper bound p
    np.random.seed(seed)
    n = w.shape[0]
    buf = np.empty((max(cap, 16), 2), dtype=np.int64)
    k = 0
    for u in range(n - 1):
        v = u + 1
        p = min(w[u] * w[v] / total, 1.0)
        while v < n and p > 0.0:
            if p != 1.0:
                r = np.random.random()
                skip = math.floor(math.log(1.0 - r) / math.log1p(-p))
                if skip >= n:
                    break
                v += int(skip)
            if v < n:
                q = min(w[u] * w[v] / total, 1.0)
                if np.random.random() < q / p:
                    buf = _push(buf, k, u, v)
                    k += 1
                p = q
                v += 1
    return buf[:k]


@numba.njit(cache=True)
def _gnp_edges(n, p, seed, cap):
    np.random.seed(seed)
    buf = np.empty((max(cap, 16), 2), dtype=np.int64)
    k = 0
    if p <= 0.0:
        return buf[:0]
    if p >= 1.0:
        for v in range(1, n):
            for u in range(v):
                buf = _push(buf, k, u, v)
                k += 1
        return buf[:k]
    lp = math.log1p(-p)
    v = 1
    u = -1
    while v < n:
        r = np.random.random()
        skip = math.floor(math.log(1.0 - r) / lp)
        if skip >= n * n:
            break
        u = u + 1 + int(skip)
        while u >= v and v < n:
            u -= v
            v += 1
        if v < n:
            buf = _push(buf, k, u, v)
            k += 1
    return buf[:k]


def chung_lu_from_weights(weights, rng_seed: int = 0) -> Graph:
    """Chung-Lu graph: edge (i, j) present with prob. min(w_i w_j / sum(w), 1)."""
    w = np.asarray(weights, dtype=np.float64)
    if w.size < 2:
        raise ParameterError("need at least 2 vertices")
    if np.any(w <= 0) or not np.all(np.isfinite(w)):
        raise ParameterError("weights must be positive and finite")
    order = np.argsort(-w, kind="stable")
    ws = w[order]
    total = float(w.sum())
    cap = int(min(ws.sum() / 2.0 * 1.2 + 64, 5e8))
    e = _chung_lu_edges(ws, total, _seed32(rng_seed, 1), cap)
    return Graph.from_edges(w.size, order[e], weights=w)


def generate_chung_lu(spec: WeightedGraphSpec) -> Graph:
    return chung_lu_from_weights(spec.weights(), spec.rng_seed)


def generate_gnp(n: int, mean_degree: float, rng_seed: int = 0) -> Graph:
    """G(n, p) with p = mean_degree / (n - 1)."""
    if n < 2:
        raise ParameterError(f"n must be >= 2, got {n}")
    if mean_degree < 0 or mean_degree > n - 1:
        raise ParameterError(f"mean degree must lie in [0, n-1], got {mean_degree}")
    p = mean_degree / (n - 1)
    cap = int(min(n * mean_degree / 2.0 * 1.2 + 64, 5e8))
    e = _gnp_edges(n, p, _seed32(rng_seed, 2), cap)
    return Graph.from_edges(n, e)


def sample_observed_pair(ground: Graph, s: float, rng_seed: int = 0) -> ObservedPair:
    """Keep each edge in G1 and, independently, in G2 with prob. s; relabel G2."""
    if not 0.0 <= s <= 1.0:
        raise ParameterError(f"s must lie in [0, 1], got {s}")
    rng = np.random.default_rng(np.random.SeedSequence([int(rng_seed), 3]))
    e = ground.edges()
    keep1 = rng.random(len(e)) < s
    keep2 = rng.random(len(e)) < s
    truth = rng.permutation(ground.n).astype(np.int64)
    w1 = ground.weights
    w2 = None
    if w1 is not None:
        w2 = np.empty_like(w1)
        w2[truth] = w1
    g1 = Graph.from_edges(ground.n, e[keep1], weights=w1)
    g2 = Graph.from_edges(ground.n, truth[e[keep2]], weights=w2)
    return ObservedPair(g1, g2, truth, float(s))
