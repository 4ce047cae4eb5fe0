"""Compiled inner loops for mark propagation.

``percolate`` (pop-by-pop PGM) keeps mark counters in an open-addressing
table keyed by ``a * n2 + b + 1`` (0 marks an empty slot). Pairs with an
already used endpoint are never inserted, so memory is bounded by the number
of distinct live pairs marked. The batch stages (``batch_crossings``) instead
recount marks per G1 candidate in a dense scratch row, which needs no table.

Candidate filters (``mode``):
    0  every pair
    1  same-slice pairs of slice ``target`` with at least one inner endpoint
    2  pairs whose endpoints both sit in slice >= ``kmin`` and that are not
       in the top region (see ``_is_top``)
    3  top-region pairs only
"""
import numba
import numpy as np

_GOLD = np.uint64(0x9E3779B97F4A7C15)
_ONE = np.uint64(1)


@numba.njit(inline="always")
def _home(key, shift):
    return np.int64((key * _GOLD) >> shift)


@numba.njit(cache=True)
def new_table(cap_hint):
    bits = 10
    while (1 << bits) < 2 * cap_hint and bits < 40:
        bits += 1
    keys = np.zeros(1 << bits, dtype=np.uint64)
    vals = np.zeros(1 << bits, dtype=np.int32)
    return keys, vals, np.uint64(64 - bits)


@numba.njit(cache=True)
def _grow(keys, vals, shift):
    cap = keys.shape[0] * 2
    nk = np.zeros(cap, dtype=np.uint64)
    nv = np.zeros(cap, dtype=np.int32)
    nshift = shift - _ONE
    mask = cap - 1
    for i in range(keys.shape[0]):
        k = keys[i]
        if k != 0:
            j = _home(k, nshift)
            while nk[j] != 0:
                j = (j + 1) & mask
            nk[j] = k
            nv[j] = vals[i]
    return nk, nv, nshift


@numba.njit(inline="always")
def _find(keys, key, shift):
    mask = keys.shape[0] - 1
    j = _home(key, shift)
    while True:
        k = keys[j]
        if k == key or k == 0:
            return j
        j = (j + 1) & mask


@numba.njit(inline="always")
def _p1_eligible(v1, v2, sl1, sl2, in1, in2):
    return sl1[v1] == 1 and sl2[v2] == 1 and (in1[v1] != 0 or in2[v2] != 0)


@numba.njit(inline="always")
def _is_top(v1, v2, sl1, sl2, in1, in2, hi1, hi2):
    return (hi1[v1] != 0 or hi2[v2] != 0) and not _p1_eligible(v1, v2, sl1, sl2, in1, in2)


@numba.njit(inline="always")
def _eligible(mode, v1, v2, sl1, sl2, in1, in2, hi1, hi2, target, kmin):
    if mode == 0:
        return True
    if mode == 1:
        return sl1[v1] == target and sl2[v2] == target and (in1[v1] != 0 or in2[v2] != 0)
    if mode == 2:
        if sl1[v1] < kmin or sl2[v2] < kmin:
            return False
        return not _is_top(v1, v2, sl1, sl2, in1, in2, hi1, hi2)
    return _is_top(v1, v2, sl1, sl2, in1, in2, hi1, hi2)


@numba.njit(inline="always")
def _side_ok(mode, v1, sl1, target, kmin):
    # cheap pre-filter on the G1 endpoint
    if mode == 1:
        return sl1[v1] == target
    if mode == 2:
        return sl1[v1] >= kmin
    return True


@numba.njit(cache=True, nogil=True)
def percolate(ptr1, idx1, ptr2, idx2, used1, used2,
              mode, sl1, sl2, in1, in2, hi1, hi2, target, kmin,
              grp_a, grp_b, grp_start, n_groups, r, uniforms, fifo,
              out_a, out_b, out_marks, out_step, n_out, t0, cap_hint):
    """Alg.-1 style percolation from a frontier of atomic pair groups.

    Pops a group uniformly at random (or FIFO), marks every live candidate in
    adj1 x adj2 of each member, and admits the pairs whose counter reached
    exactly ``r`` during the pop, in ascending (a, b) order, skipping
    conflicts. Admitted pairs join the frontier as singleton groups.
    Returns (n_out, pops, table_size).
    """
    n2 = np.uint64(ptr2.shape[0] - 1)
    keys, vals, shift = new_table(cap_hint)
    size = 0
    bag = np.empty(grp_start.shape[0], dtype=np.int64)
    for g in range(n_groups):
        bag[g] = g
    n_bag = n_groups
    head = 0
    n_mem = grp_start[n_groups]
    cross = np.empty(1024, dtype=np.uint64)
    pops = 0
    while n_bag > 0:
        if fifo:
            g = bag[head]
            head += 1
        else:
            j = int(uniforms[pops] * n_bag)
            if j >= n_bag:
                j = n_bag - 1
            g = bag[j]
            bag[j] = bag[n_bag - 1]
        n_bag -= 1
        pops += 1
        n_cross = 0
        for m in range(grp_start[g], grp_start[g + 1]):
            u1 = grp_a[m]
            u2 = grp_b[m]
            for p1 in range(ptr1[u1], ptr1[u1 + 1]):
                v1 = idx1[p1]
                if used1[v1] != 0 or not _side_ok(mode, v1, sl1, target, kmin):
                    continue
                base = np.uint64(v1) * n2 + _ONE
                for p2 in range(ptr2[u2], ptr2[u2 + 1]):
                    v2 = idx2[p2]
                    if used2[v2] != 0:
                        continue
                    if not _eligible(mode, v1, v2, sl1, sl2, in1, in2, hi1, hi2, target, kmin):
                        continue
                    key = base + np.uint64(v2)
                    if 2 * (size + 1) > keys.shape[0]:
                        keys, vals, shift = _grow(keys, vals, shift)
                    s = _find(keys, key, shift)
                    if keys[s] == 0:
                        keys[s] = key
                        size += 1
                    vals[s] += 1
                    if vals[s] == r:
                        if n_cross >= cross.shape[0]:
                            nc = np.empty(cross.shape[0] * 2, dtype=np.uint64)
                            nc[:n_cross] = cross[:n_cross]
                            cross = nc
                        cross[n_cross] = key
                        n_cross += 1
        if n_cross > 0:
            ordered = np.sort(cross[:n_cross])
            for q in range(n_cross):
                key = ordered[q] - _ONE
                a = np.int64(key // n2)
                b = np.int64(key % n2)
                if used1[a] != 0 or used2[b] != 0:
                    continue
                used1[a] = 1
                used2[b] = 1
                out_a[n_out] = a
                out_b[n_out] = b
                out_marks[n_out] = r
                out_step[n_out] = t0 + pops
                n_out += 1
                grp_a[n_mem] = a
                grp_b[n_mem] = b
                n_mem += 1
                grp_start[n_groups + 1] = n_mem
                bag[head + n_bag] = n_groups
                n_groups += 1
                n_bag += 1
    return n_out, pops, size


@numba.njit(cache=True, nogil=True)
def neighbor_candidates(ptr1, idx1, used1, src, n1):
    """Distinct unused G1 neighbors of the vertices in ``src``."""
    seen = np.zeros(n1, dtype=np.uint8)
    out = np.empty(1024, dtype=np.int64)
    k = 0
    for i in range(src.shape[0]):
        u = src[i]
        for p in range(ptr1[u], ptr1[u + 1]):
            v = idx1[p]
            if used1[v] != 0 or seen[v] != 0:
                continue
            seen[v] = 1
            if k >= out.shape[0]:
                grown = np.empty(out.shape[0] * 2, dtype=np.int64)
                grown[:k] = out[:k]
                out = grown
            out[k] = v
            k += 1
    return np.sort(out[:k])


@numba.njit(cache=True, nogil=True)
def batch_crossings(ptr1, idx1, ptr2, idx2, used1, used2,
                    mode, sl1, sl2, in1, in2, hi1, hi2, target, kmin,
                    partner, fresh, cand, thr):
    """Pairs whose mark count from the reference set crosses ``thr``.

    ``partner[u1]`` is the G2 vertex of the reference pair on u1 (-1 if
    none) and ``fresh[u1]`` flags reference pairs added since the previous
    call. For each unused candidate v1 the marks of every live pair (v1, v2)
    are counted in a dense scratch array; a pair crosses when its full count
    is >= thr but its count without the fresh pairs is below thr.
    Returns (a, b, count) of the eligible crossing pairs.
    """
    n2 = ptr2.shape[0] - 1
    cnt = np.zeros(n2, dtype=np.int32)
    new = np.zeros(n2, dtype=np.int32)
    touched = np.empty(n2, dtype=np.int64)
    out_a = np.empty(1024, dtype=np.int64)
    out_b = np.empty(1024, dtype=np.int64)
    out_c = np.empty(1024, dtype=np.int64)
    k = 0
    for ci in range(cand.shape[0]):
        v1 = cand[ci]
        if used1[v1] != 0 or not _side_ok(mode, v1, sl1, target, kmin):
            continue
        nt = 0
        for p1 in range(ptr1[v1], ptr1[v1 + 1]):
            u1 = idx1[p1]
            u2 = partner[u1]
            if u2 < 0:
                continue
            f = fresh[u1]
            for p2 in range(ptr2[u2], ptr2[u2 + 1]):
                v2 = idx2[p2]
                if used2[v2] != 0:
                    continue
                if cnt[v2] == 0:
                    touched[nt] = v2
                    nt += 1
                cnt[v2] += 1
                if f != 0:
                    new[v2] += 1
        for t in range(nt):
            v2 = touched[t]
            c = cnt[v2]
            if c >= thr and c - new[v2] < thr and \
                    _eligible(mode, v1, v2, sl1, sl2, in1, in2, hi1, hi2, target, kmin):
                if k >= out_a.shape[0]:
                    m = out_a.shape[0] * 2
                    na = np.empty(m, dtype=np.int64)
                    nb = np.empty(m, dtype=np.int64)
                    nc = np.empty(m, dtype=np.int64)
                    na[:k] = out_a[:k]
                    nb[:k] = out_b[:k]
                    nc[:k] = out_c[:k]
                    out_a, out_b, out_c = na, nb, nc
                out_a[k] = v1
                out_b[k] = v2
                out_c[k] = c
                k += 1
            cnt[v2] = 0
            new[v2] = 0
    return out_a[:k], out_b[:k], out_c[:k]


@numba.njit(cache=True, nogil=True)
def admit_batch(a, b, c, used1, used2):
    """Admit pairs by descending mark count, ties in (a, b) order, skipping conflicts."""
    m = a.shape[0]
    order = np.argsort(b, kind="mergesort")
    order = order[np.argsort(a[order], kind="mergesort")]
    neg = np.empty(m, dtype=np.int64)
    for i in range(m):
        neg[i] = -c[order[i]]
    order = order[np.argsort(neg, kind="mergesort")]
    keep = np.zeros(m, dtype=np.bool_)
    for q in range(m):
        i = order[q]
        if used1[a[i]] != 0 or used2[b[i]] != 0:
            continue
        used1[a[i]] = 1
        used2[b[i]] = 1
        keep[q] = True
    sel = order[keep]
    return a[sel], b[sel], c[sel]
