"""Degree-driven matching (DDM): PGM staged over geometric weight slices.

Slice 0 holds weights >= alpha_1 = n^gamma, slice k >= 1 holds
[alpha_{k+1}, alpha_k) with alpha_{k+1} = alpha_k / 2, and weights below the
last boundary are excluded from slicing. With estimated weights (observed
degree / s) each slice is split into an inner region
[alpha_{k+1}(1+eps), alpha_k(1-eps)) and an outer remainder; a pair belongs to
slice k only if both endpoints fall in slice k and at least one is inner.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .graph import ObservedPair, ParameterError
from .pgm import (MatchState, SeedError, VertexPair, check_seeds, frontier_uniforms,
                  percolate_groups)

EXCLUDED, INNER, OUTER = 0, 1, 2


def rho(alpha: float, beta: float, n: int) -> float:
    """Cascade threshold max(4, alpha^(4-beta) / sqrt(n))."""
    return max(4.0, alpha ** (4.0 - beta) / math.sqrt(n))


def strict_threshold(x: float) -> int:
    """Smallest integer mark count strictly greater than ``x``."""
    return int(math.floor(round(x, 9))) + 1


@dataclass
class SlicePlan:
    n: int
    gamma: float
    alphas: np.ndarray  # alpha_0 >= alpha_1 > alpha_2 > ... (last = lowest boundary)
    epsilon_inner: float
    mode: str
    alpha_star: float
    alpha_floor: float
    beta: float
    w_bar: float
    s: float
    C: float = 1.0
    q_floor: float = 4.0
    theory: bool = False

    @property
    def num_slices(self) -> int:
        """K: slices are 0..K, index K+1 means excluded."""
        return len(self.alphas) - 2

    def bounds(self, k: int) -> tuple[float, float]:
        if k == 0:
            return float(self.alphas[1]), math.inf
        return float(self.alphas[k + 1]), float(self.alphas[k])

    def kind(self, k: int) -> str:
        if k == 0:
            return "top"
        if k == 1:
            return "p1"
        upper = self.alphas[k]
        if upper > self.alpha_star:
            return "cascade"
        return "h" if upper > self.q_floor else "q"

    def slice_of(self, values) -> np.ndarray:
        v = np.asarray(values, dtype=np.float64)
        # alphas[1:] is strictly decreasing; count boundaries above v
        desc = self.alphas[1:]
        k = np.searchsorted(-desc, -v, side="right")
        # k == 0 -> v >= alpha_1 ... k == K+1 -> below the last boundary
        return k.astype(np.int32)

    def region_of(self, values, slices) -> np.ndarray:
        v = np.asarray(values, dtype=np.float64)
        k = np.asarray(slices)
        out = np.full(v.shape, OUTER, dtype=np.uint8)
        eps = self.epsilon_inner
        alphas = np.append(self.alphas, 0.0)
        lo = alphas[np.minimum(k + 1, len(alphas) - 1)] * (1 + eps)
        hi = np.where(k == 0, np.inf, alphas[np.minimum(k, len(alphas) - 1)] * (1 - eps))
        out[(v >= lo) & (v < hi)] = INNER
        out[k > self.num_slices] = EXCLUDED
        return out

    def reference_slice(self) -> int | None:
        """Largest slice whose upper bound lies below log(n)^2 and above the q floor."""
        cap = math.log(self.n) ** 2
        for k in range(2, self.num_slices + 1):
            if self.q_floor < self.alphas[k] < cap:
                return k
        return None

    def to_dict(self) -> dict:
        return {"n": self.n, "gamma": self.gamma, "alphas": [float(a) for a in self.alphas],
                "epsilon_inner": self.epsilon_inner, "mode": self.mode,
                "alpha_star": self.alpha_star, "alpha_floor": self.alpha_floor,
                "kinds": [self.kind(k) for k in range(self.num_slices + 1)]}


def alpha_star(n, beta, w_bar, s, epsilon, C=1.0) -> float:
    """(8 w_bar log n / (C s^2 (1-eps)^2))^(1/(3-beta)); infinite for beta >= 3."""
    if beta >= 3:
        return math.inf
    base = 8 * w_bar * math.log(n) / (C * s * s * (1 - epsilon) ** 2)
    log_val = math.log(base) / (3 - beta)
    return math.inf if log_val > 700 else math.exp(log_val)


def build_slice_plan(n: int, beta: float, w_bar: float, s: float, gamma: float = 0.5,
                     epsilon_inner: float = 0.1, C: float = 1.0, mode: str = "estimated_weight",
                     alpha_star_override: float | None = None, alpha_floor: float = 1.0,
                     q_floor: float = 4.0, theory: bool = False) -> SlicePlan:
    if theory and not 0.25 < gamma < 0.5:
        raise ParameterError(f"theory mode needs 1/4 < gamma < 1/2, got {gamma}")
    if not 0 < gamma <= 0.5:
        raise ParameterError(f"gamma must lie in (0, 1/2], got {gamma}")
    if not 0.25 < gamma < 0.5:
        warnings.warn(f"gamma={gamma} outside (1/4, 1/2): no first-slice guarantee", stacklevel=2)
    if not 0 < epsilon_inner <= 0.25:
        raise ParameterError(f"epsilon_inner must lie in (0, 1/4], got {epsilon_inner}")
    if C <= 0:
        raise ParameterError(f"C must be positive, got {C}")
    if mode not in ("true_weight", "estimated_weight"):
        raise ParameterError(f"unknown slicing mode {mode!r}")
    if alpha_floor <= 0:
        raise ParameterError("alpha_floor must be positive")
    a0 = math.sqrt(n)
    a1 = n ** gamma
    alphas = [a0, a1]
    while alphas[-1] / 2 >= alpha_floor:
        alphas.append(alphas[-1] / 2)
    if len(alphas) < 3:
        raise ParameterError("alpha_floor leaves no slice below alpha_1")
    astar = alpha_star(n, beta, w_bar, s, epsilon_inner, C) if alpha_star_override is None \
        else float(alpha_star_override)
    return SlicePlan(n=n, gamma=gamma, alphas=np.asarray(alphas), epsilon_inner=epsilon_inner,
                     mode=mode, alpha_star=astar, alpha_floor=alpha_floor, beta=beta,
                     w_bar=w_bar, s=s, C=C, q_floor=q_floor, theory=theory)


@dataclass
class StagePlan:
    r_p1: int
    cascade: dict  # target slice -> integer threshold
    rho_values: dict  # target slice -> real rho of the reference slice
    r_low: int
    rho0: float
    r_top: int
    simplified: bool = False

    def to_dict(self) -> dict:
        return {"r_p1": self.r_p1, "cascade": self.cascade, "rho": self.rho_values,
                "r_low": self.r_low, "rho0": self.rho0, "r_top": self.r_top,
                "simplified": self.simplified}


def build_stage_plan(plan: SlicePlan, r_p1: int | None = None, simplified: bool = False,
                     r_low: int = 4, theory: bool | None = None) -> StagePlan:
    """Per-stage thresholds.

    The cascade stage into slice k+1 needs more than rho_k marks from slice k;
    the top slice needs more than n^(gamma/2). ``simplified`` uses ``r_low``
    everywhere.
    """
    theory = plan.theory if theory is None else theory
    rho0 = plan.n ** (plan.gamma / 2)
    if simplified:
        r = r_low if r_p1 is None else r_p1
        cascade = {k: r for k in range(2, plan.num_slices + 1) if plan.kind(k) == "cascade"}
        return StagePlan(r, cascade, {}, r, rho0, r, simplified=True)
    if theory:
        # lazy import keeps analysis free of ddm
        from .analysis import p1_seed_exponent
        r_min = p1_seed_exponent(plan.gamma, plan.beta, 4)["r_min"]
        if r_p1 is None:
            r_p1 = max(4, r_min)
        elif r_p1 < r_min:
            raise ParameterError(f"theory mode needs r_p1 >= {r_min}, got {r_p1}")
    elif r_p1 is None:
        r_p1 = 4
    cascade, rhos = {}, {}
    for k in range(2, plan.num_slices + 1):
        if plan.kind(k) != "cascade":
            continue
        x = rho(plan.alphas[k - 1], plan.beta, plan.n)
        rhos[k] = x
        cascade[k] = strict_threshold(x)
    return StagePlan(int(r_p1), cascade, rhos, int(r_low), rho0, strict_threshold(rho0))


@dataclass
class SliceAssignment:
    slice1: np.ndarray
    slice2: np.ndarray
    region1: np.ndarray
    region2: np.ndarray
    high1: np.ndarray  # value above (alpha_1 + alpha_2) / 2
    high2: np.ndarray
    value1: np.ndarray
    value2: np.ndarray

    def kernel_args(self):
        return (self.slice1, self.slice2,
                (self.region1 == INNER).astype(np.uint8), (self.region2 == INNER).astype(np.uint8),
                self.high1, self.high2)

    def pair_slice(self, a, b) -> np.ndarray:
        """Slice index of each pair, or -1 when the pair belongs to no slice."""
        a = np.asarray(a)
        b = np.asarray(b)
        k1, k2 = self.slice1[a], self.slice2[b]
        ok = (k1 == k2) & ((self.region1[a] == INNER) | (self.region2[b] == INNER))
        return np.where(ok, k1, -1)


def assign_slices(pair: ObservedPair, plan: SlicePlan) -> SliceAssignment:
    if pair.n != plan.n:
        raise ParameterError(f"plan built for n={plan.n}, graph has n={pair.n}")
    if plan.mode == "true_weight":
        if pair.g1.weights is None or pair.g2.weights is None:
            raise ParameterError("true_weight slicing needs groundtruth weights on the graphs")
        v1, v2 = pair.g1.weights, pair.g2.weights
    else:
        if pair.s <= 0:
            raise ParameterError("estimated weights need s > 0")
        v1 = pair.g1.degrees() / pair.s
        v2 = pair.g2.degrees() / pair.s
    k1, k2 = plan.slice_of(v1), plan.slice_of(v2)
    r1, r2 = plan.region_of(v1, k1), plan.region_of(v2, k2)
    if plan.mode == "true_weight":
        r1 = np.where(r1 == EXCLUDED, EXCLUDED, INNER).astype(np.uint8)
        r2 = np.where(r2 == EXCLUDED, EXCLUDED, INNER).astype(np.uint8)
    cut = (plan.alphas[1] + plan.alphas[2]) / 2
    return SliceAssignment(k1, k2, r1, r2, (v1 > cut).astype(np.uint8), (v2 > cut).astype(np.uint8),
                           np.asarray(v1, dtype=np.float64), np.asarray(v2, dtype=np.float64))


def group_uniform_seeds(seeds, plan: SlicePlan, assignment: SliceAssignment) -> list[list[VertexPair]]:
    """Frontier schedule for the first stage.

    Seeds in slices 0 and 1 (or excluded) stay single. Seeds in slice k >= 2
    are bundled into atomic groups of ceil(alpha_1 / alpha_{k+1}) + 1; a
    trailing incomplete group is injected one seed at a time.
    """
    seeds = [VertexPair(int(a), int(b)) for a, b in seeds]
    single, by_slice = [], {}
    for p in seeds:
        k = int(assignment.slice1[p.a])
        if 2 <= k <= plan.num_slices:
            by_slice.setdefault(k, []).append(p)
        else:
            single.append(p)
    groups = [[p] for p in single]
    for k in sorted(by_slice):
        size = int(math.ceil(round(plan.alphas[1] / plan.alphas[k + 1], 9))) + 1
        members = by_slice[k]
        full = len(members) // size * size
        groups += [members[i:i + size] for i in range(0, full, size)]
        groups += [[p] for p in members[full:]]
    return groups


@dataclass
class Stage:
    name: str
    kind: str
    slice: int | None
    threshold: int
    admitted: int
    reference: np.ndarray | None = field(default=None, repr=False)


@dataclass
class DDMResult:
    state: MatchState
    stages: list
    assignment: SliceAssignment
    plan: SlicePlan
    stage_plan: StagePlan

    def trace(self, truth=None) -> list[dict]:
        """Per-stage summary; good/bad counts need the hidden ``truth``."""
        rows, cum_good, cum_bad = [], 0, 0
        st = self.state
        good = None if truth is None else (np.asarray(truth)[st.pair_a] == st.pair_b)
        for i, stage in enumerate(self.stages):
            row = {"stage": i, "name": stage.name, "kind": stage.kind, "slice": stage.slice,
                   "threshold": stage.threshold, "admitted": stage.admitted}
            if stage.slice is not None:
                lo, hi = self.plan.bounds(stage.slice)
                row["bounds"] = [lo, None if math.isinf(hi) else hi]
            if good is not None:
                mask = st.stage == i
                g = int(np.count_nonzero(good & mask))
                b = int(np.count_nonzero(mask)) - g
                cum_good += g
                cum_bad += b
                row.update(good=g, bad=b, cumulative_good=cum_good, cumulative_bad=cum_bad)
            rows.append(row)
        return rows

    def write_trace(self, path, truth=None) -> None:
        with open(path, "w") as fh:
            json.dump({"slice_plan": self.plan.to_dict(), "stage_plan": self.stage_plan.to_dict(),
                       "stages": self.trace(truth)}, fh, indent=2)


class _Acc:
    """Growing record of matched pairs across stages."""

    def __init__(self):
        self.a, self.b, self.marks, self.step, self.stage, self.seed = [], [], [], [], [], []
        self.count = 0

    def add(self, a, b, marks, step, stage, seed=False):
        k = len(a)
        self.a.append(np.asarray(a, np.int64))
        self.b.append(np.asarray(b, np.int64))
        self.marks.append(np.asarray(marks, np.int64))
        self.step.append(np.asarray(step, np.int64))
        self.stage.append(np.full(k, stage, np.int64))
        self.seed.append(np.full(k, seed, bool))
        self.count += k
        return np.arange(self.count - k, self.count)

    def arrays(self):
        cat = lambda xs, dt: np.concatenate(xs) if xs else np.empty(0, dt)  # noqa: E731
        return (cat(self.a, np.int64), cat(self.b, np.int64), cat(self.marks, np.int64),
                cat(self.step, np.int64), cat(self.stage, np.int64), cat(self.seed, bool))


def run_ddm(pair: ObservedPair, seeds, plan: SlicePlan, stages: StagePlan | None = None,
            rng_seed: int = 0, fifo: bool = False, keep_reference: bool = False,
            assignment: SliceAssignment | None = None) -> DDMResult:
    """Staged degree-driven matching.

    1. PGM restricted to slice-1 pairs, fed by every seed (grouped by slice).
    2. Cascade slices: one-shot admission of unmatched pairs below the
       reference slice with more than rho marks from its core.
    3. Remaining slices: repeated waves at threshold ``r_low`` from the
       accumulated set (seeds, last core, and every wave so far).
    4. Top-region pairs with more than n^(gamma/2) marks from the reference
       low slice.
    """
    stages = stages or build_stage_plan(plan)
    g1, g2 = pair.g1, pair.g2
    seeds = check_seeds(seeds, g1.n, g2.n)
    assignment = assignment or assign_slices(pair, plan)
    karg = assignment.kernel_args()
    acc = _Acc()
    recs: list[Stage] = []
    used1 = np.zeros(g1.n, dtype=np.uint8)
    used2 = np.zeros(g2.n, dtype=np.uint8)
    pops_total = 0
    peak_table = 0

    def core_of(idx, k):
        a, b = acc_pairs(idx)
        return idx[assignment.pair_slice(a, b) == k]

    def acc_pairs(idx):
        a, b = acc.arrays()[:2]
        return a[idx], b[idx]

    seed_idx = acc.add([p.a for p in seeds], [p.b for p in seeds], np.zeros(len(seeds)),
                       np.zeros(len(seeds)), 0, seed=True)
    recs.append(Stage("seeds", "seed", None, 0, len(seeds)))
    if not seeds:
        return _finish(pair, acc, recs, stages, pops_total, peak_table, assignment, plan)
    if np.all(assignment.slice1[[p.a for p in seeds]] > plan.num_slices):
        raise SeedError("seed set unreachable: no seed lies in any slice")
    for p in seeds:
        used1[p.a] = 1
        used2[p.b] = 1

    # 1. first slice
    groups = group_uniform_seeds(seeds, plan, assignment)
    uniforms = frontier_uniforms(rng_seed, len(groups) + min(g1.n, g2.n))
    a, b, marks, step, pops, size = percolate_groups(
        pair, groups, used1, used2, stages.r_p1, uniforms, fifo, mode=1, slices=karg, target=1)
    pops_total += pops
    peak_table = max(peak_table, size)
    idx1 = acc.add(a, b, marks, step, len(recs))
    recs.append(Stage("p1", "p1", 1, stages.r_p1, len(a),
                      np.concatenate([seed_idx, idx1]) if keep_reference else None))
    core = core_of(np.concatenate([seed_idx, idx1]), 1)

    partner = np.full(g1.n, -1, dtype=np.int64)
    fresh = np.zeros(g1.n, dtype=np.uint8)

    def batch(ref, mode, kmin, thr, fresh_ref=None):
        """Admit live pairs whose marks from ``ref`` reach ``thr``; ``fresh_ref`` limits new marks."""
        ra, rb = acc_pairs(ref)
        partner[ra] = rb
        fa = ra if fresh_ref is None else acc_pairs(fresh_ref)[0]
        fresh[fa] = 1
        cand = _kernels.neighbor_candidates(g1.indptr, g1.indices, used1, fa, g1.n)
        a, b, c = _kernels.batch_crossings(
            g1.indptr, g1.indices, g2.indptr, g2.indices, used1, used2, mode, *karg, 0, kmin,
            partner, fresh, cand, thr)
        fresh[fa] = 0
        return _kernels.admit_batch(a, b, c, used1, used2)

    def reset(ref):
        partner[acc_pairs(ref)[0]] = -1

    # 2. cascade
    k = 2
    while k <= plan.num_slices and plan.kind(k) == "cascade":
        thr = stages.cascade[k]
        a, b, c = batch(core, 2, k - 1, thr)
        reset(core)
        idx = acc.add(a, b, c, np.full(a.size, pops_total), len(recs))
        recs.append(Stage(f"cascade-{k}", "cascade", k, thr, a.size, core if keep_reference else None))
        core = core_of(idx, k)
        k += 1

    # 3. low slices: marks accumulate over the growing set I
    pending = np.union1d(seed_idx, core)
    ident = pending.copy()
    wave = 0
    while pending.size:
        a, b, c = batch(ident, 2, 1, stages.r_low, fresh_ref=pending)
        if a.size == 0:
            break
        wave += 1
        idx = acc.add(a, b, c, np.full(a.size, pops_total + wave), len(recs))
        recs.append(Stage(f"low-{wave}", "low", None, stages.r_low, a.size,
                          ident.copy() if keep_reference else None))
        ident = np.concatenate([ident, idx])
        pending = idx
    reset(ident)

    # 4. top region
    kref = plan.reference_slice()
    if kref is not None:
        ref = core_of(np.arange(acc.count), kref)
        a, b, c = batch(ref, 3, 0, stages.r_top)
        reset(ref)
        acc.add(a, b, c, np.full(a.size, pops_total + wave + 1), len(recs))
        recs.append(Stage("top", "top", 0, stages.r_top, a.size, ref if keep_reference else None))
    return _finish(pair, acc, recs, stages, pops_total, peak_table, assignment, plan)


def _finish(pair, acc, recs, stages, pops, table, assignment, plan) -> DDMResult:
    a, b, marks, step, stage, seed = acc.arrays()
    state = MatchState(n1=pair.g1.n, n2=pair.g2.n, pair_a=a, pair_b=b, is_seed=seed,
                       marks_at_match=marks, step_index=step, processed_count=int(pops),
                       r=stages.r_p1, table_size=int(table), stage=stage)
    return DDMResult(state, recs, assignment, plan, stages)
