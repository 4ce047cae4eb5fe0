"""Closed-form seed bounds and run metrics."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import ObservedPair, ParameterError


class NoTransitionError(ValueError):
    """No jump of at least 2x between consecutive points of a seed curve."""


@dataclass(frozen=True)
class TheoryParams:
    n: int
    p: float
    s: float
    r: int
    gamma: float = 0.45
    beta: float = 2.5

    def __post_init__(self):
        if not 0 < self.p <= 1:
            raise ParameterError(f"p must lie in (0, 1], got {self.p}")
        if not 0 < self.s <= 1:
            raise ParameterError(f"s must lie in (0, 1], got {self.s}")


def _ceil(x: float) -> int:
    # ceil that ignores floating-point dust above an integer
    return math.ceil(round(x, 9))


def critical_seed_count(params: TheoryParams) -> float:
    """a_c = (1 - 1/r) ((r-1)! / (n (p s^2)^r))^(1/(r-1)), evaluated in log space."""
    r, n = params.r, params.n
    if r < 2:
        raise ParameterError(f"r must be >= 2, got {r}")
    log_inner = math.lgamma(r) - math.log(n) - r * math.log(params.p * params.s ** 2)
    return (1.0 - 1.0 / r) * math.exp(log_inner / (r - 1))


def in_percolation_regime(params: TheoryParams, slack: float = 1.0) -> dict:
    """Check 1/n << p s^2 <= s^2 n^(-4/r); ``slack`` is the factor read as '<<'."""
    ps2 = params.p * params.s ** 2
    lower = ps2 > slack / params.n
    upper = ps2 <= params.s ** 2 * params.n ** (-4.0 / params.r)
    return {"lower": bool(lower), "upper": bool(upper), "inside": bool(lower and upper),
            "ps2": ps2, "lower_bound": 1.0 / params.n,
            "upper_bound": params.s ** 2 * params.n ** (-4.0 / params.r)}


def p1_seed_exponent(gamma: float, beta: float, r: int) -> dict:
    """Seed exponent for the first slice and the minimum admissible threshold.

    e = ((1-2g) r + g (beta-1) - 1) / (r-1); r_min = ceil(4 (1 + g (1-beta)) / (1-2g)).
    """
    if not 0.25 < gamma < 0.5:
        raise ParameterError(f"gamma must lie in (1/4, 1/2), got {gamma}")
    if not 2 < beta < 3:
        raise ParameterError(f"beta must lie in (2, 3), got {beta}")
    if r < 2:
        raise ParameterError(f"r must be >= 2, got {r}")
    e = ((1 - 2 * gamma) * r + gamma * (beta - 1) - 1) / (r - 1)
    r_min = _ceil(4 * (1 + gamma * (1 - beta)) / (1 - 2 * gamma))
    return {
        "exponent": e,
        "r_min": r_min,
        "gamma_above_lower": gamma > 0.25 - 3.0 / (4 * r),
        "gamma_below_upper": gamma < 1.0 / (beta - 1),
        "r_ok": r >= r_min,
    }


def boundary_edges(pair: ObservedPair, seeds) -> int:
    """Number of pairs-graph edges joining a seed pair to a non-seed pair."""
    seeds = [(int(a), int(b)) for a, b in seeds]
    if not seeds:
        return 0
    partner = dict(seeds)  # G1 vertex -> G2 vertex of the seed using it
    g1, g2 = pair.g1, pair.g2
    deg1, deg2 = g1.degrees(), g2.degrees()
    total = 0
    for u1, u2 in seeds:
        total += int(deg1[u1]) * int(deg2[u2])
        nb2 = g2.neighbors(u2)
        for v1 in g1.neighbors(u1).tolist():
            v2 = partner.get(v1)
            if v2 is not None:
                k = np.searchsorted(nb2, v2)
                if k < nb2.size and nb2[k] == v2:
                    total -= 1
    return total


def detect_transition(curve) -> float:
    """a0 just after the largest multiplicative jump of the matched count.

    Counts below 1 are floored at 1 before taking ratios. Ties go to the
    smaller a0. Raises NoTransitionError when the largest jump is below 2x.
    """
    pts = [(float(a), float(m)) for a, m in curve]
    if len(pts) < 4:
        raise ParameterError("need at least 4 curve points")
    if any(pts[i + 1][0] <= pts[i][0] for i in range(len(pts) - 1)):
        raise ParameterError("curve must be sorted by strictly increasing a0")
    best, best_i = -math.inf, None
    for i in range(len(pts) - 1):
        jump = math.log(max(pts[i + 1][1], 1.0)) - math.log(max(pts[i][1], 1.0))
        if jump > best + 1e-12:
            best, best_i = jump, i
    if best < math.log(2.0):
        raise NoTransitionError("no transition detected")
    return pts[best_i + 1][0]


@dataclass
class RunMetrics:
    good: int
    bad: int
    unmatched: int
    seeds_used: int = 0
    steps: int = 0
    matchable: int | None = None

    @property
    def precision(self) -> float:
        tot = self.good + self.bad
        return self.good / tot if tot else 1.0

    @property
    def recall(self) -> float | None:
        if not self.matchable:
            return None
        return self.good / self.matchable

    @property
    def bad_fraction(self) -> float:
        tot = self.good + self.bad
        return self.bad / tot if tot else 0.0


def matchable_count(pair: ObservedPair, min_degree: int = 4) -> int:
    """Groundtruth vertices whose observed degree is >= min_degree in both graphs."""
    d1 = pair.g1.degrees()
    d2 = pair.g2.degrees()[pair.truth]
    return int(np.count_nonzero((d1 >= min_degree) & (d2 >= min_degree)))
