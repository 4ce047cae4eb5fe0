"""Brute-force reference: the explicit pairs graph and a literal PGM over it.

Test use only. Everything here is quadratic (or worse) in n.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

from .graph import ObservedPair, ParameterError
from .pgm import check_seeds, frontier_uniforms

MAX_N = 200


@dataclass
class ExplicitPairsGraph:
    n1: int
    n2: int
    adj: dict  # (i, j) -> set of adjacent (k, l)

    @property
    def nodes(self):
        return [(i, j) for i in range(self.n1) for j in range(self.n2)]

    def edges(self) -> set:
        return {frozenset((p, q)) for p, nb in self.adj.items() for q in nb}

    def num_edges(self) -> int:
        return sum(len(nb) for nb in self.adj.values()) // 2


def build_pairs_graph(pair: ObservedPair) -> ExplicitPairsGraph:
    """[i, j] ~ [k, l] iff (i, k) in E1 and (j, l) in E2."""
    n1, n2 = pair.g1.n, pair.g2.n
    if max(n1, n2) > MAX_N:
        raise ParameterError(f"explicit pairs graph refused for n > {MAX_N}")
    e1 = [tuple(e) for e in pair.g1.edges().tolist()]
    e2 = [tuple(e) for e in pair.g2.edges().tolist()]
    adj = defaultdict(set)
    for i, k in e1:
        for j, l in e2:
            # each undirected edge pair yields two pairs-graph edges
            adj[(i, j)].add((k, l))
            adj[(k, l)].add((i, j))
            adj[(i, l)].add((k, j))
            adj[(k, j)].add((i, l))
    return ExplicitPairsGraph(n1, n2, dict(adj))


def _conflicts(p, q) -> bool:
    return (p[0] == q[0]) != (p[1] == q[1])


def run_pgm_reference(g: ExplicitPairsGraph, seeds, r: int, rng_seed: int = 0,
                      fifo: bool = False) -> set:
    """Literal transcription of the PGM loop over the explicit pairs graph."""
    seeds = [tuple(s) for s in check_seeds(seeds, g.n1, g.n2)]
    marks = defaultdict(int)
    matched = set(seeds)  # A_t
    processed = set()  # Z_t
    frontier = list(seeds)  # A_t \ Z_t, same selection policy as the engine
    uniforms = frontier_uniforms(rng_seed, len(seeds) + min(g.n1, g.n2))
    t = 0
    while frontier:
        if fifo:
            current = frontier.pop(0)
        else:
            j = min(int(uniforms[t] * len(frontier)), len(frontier) - 1)
            current = frontier[j]
            frontier[j] = frontier[-1]
            frontier.pop()
        t += 1
        reached = []
        for q in g.adj.get(current, ()):
            marks[q] += 1
            if marks[q] == r:
                reached.append(q)
        added = []
        for q in sorted(reached):
            if q in matched:
                continue
            if any(_conflicts(q, m) for m in matched) or any(_conflicts(q, m) for m in added):
                continue
            added.append(q)
        processed.add(current)
        for q in added:
            matched.add(q)
            frontier.append(q)
    assert processed == matched
    return matched
