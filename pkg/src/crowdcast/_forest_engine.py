"""Numba kernels for bagged binary decision trees.

Trees live in flat arrays (feature, threshold, left, right, pos, neg) with
local node ids; a leaf has feature == -1 and votes positive when its
positive count >= negative count. All randomness comes from an explicit
splitmix64 stream seeded per tree from (base seed, tree index), so a tree
is a pure function of (data, params, sub-seed) and parallel chunked
training reproduces sequential training exactly.

The split search sorts (value, label) pairs per candidate feature with an
in-place three-way quicksort into preallocated buffers; only tie-group
aggregates ever feed the Gini scan, so sort instability cannot change the
resulting tree.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

_U64 = np.uint64
_GAMMA = _U64(0x9E3779B97F4A7C15)


@njit(cache=True, inline="always")
def _mix(z):
    z = (z ^ (z >> _U64(30))) * _U64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> _U64(27))) * _U64(0x94D049BB133111EB)
    return z ^ (z >> _U64(31))


@njit(cache=True, inline="always")
def _next(state):
    state[0] = state[0] + _GAMMA
    return _mix(state[0])


@njit(cache=True, inline="always")
def _randint(state, n):
    return np.int64(_next(state) % _U64(n))


@njit(cache=True)
def _derive_seeds(seed, count, salt):
    """Per-tree (or per-fold) sub-seeds from one base seed."""
    out = np.empty(count, dtype=np.uint64)
    base = _U64(seed) + _U64(salt) * _U64(0x9E3779B97F4A7C16)
    for i in range(count):
        out[i] = _mix(base + _U64(i + 1) * _GAMMA)
    return out


@njit(cache=True)
def _sort_pairs(vals, labs, lo, hi, stack_lo, stack_hi):
    """In-place ascending sort of vals[lo:hi] carrying labs along."""
    top = 0
    stack_lo[top] = lo
    stack_hi[top] = hi
    top += 1
    while top > 0:
        top -= 1
        a = stack_lo[top]
        b = stack_hi[top]
        while b - a > 16:
            mid = (a + b) // 2
            vm = vals[mid]
            va = vals[a]
            vb = vals[b - 1]
            # median-of-three pivot
            if va > vm:
                if vm > vb:
                    pivot = vm
                elif va > vb:
                    pivot = vb
                else:
                    pivot = va
            else:
                if va > vb:
                    pivot = va
                elif vm > vb:
                    pivot = vb
                else:
                    pivot = vm
            lt = a
            gt = b - 1
            i = a
            while i <= gt:
                v = vals[i]
                if v < pivot:
                    vals[i] = vals[lt]
                    vals[lt] = v
                    tmp = labs[i]
                    labs[i] = labs[lt]
                    labs[lt] = tmp
                    lt += 1
                    i += 1
                elif v > pivot:
                    vals[i] = vals[gt]
                    vals[gt] = v
                    tmp = labs[i]
                    labs[i] = labs[gt]
                    labs[gt] = tmp
                    gt -= 1
                else:
                    i += 1
            # recurse into the smaller side first to bound the stack
            if lt - a < b - (gt + 1):
                stack_lo[top] = gt + 1
                stack_hi[top] = b
                top += 1
                b = lt
            else:
                stack_lo[top] = a
                stack_hi[top] = lt
                top += 1
                a = gt + 1
        # insertion sort for small runs
        for i in range(a + 1, b):
            v = vals[i]
            l = labs[i]
            j = i - 1
            while j >= a and vals[j] > v:
                vals[j + 1] = vals[j]
                labs[j + 1] = labs[j]
                j -= 1
            vals[j + 1] = v
            labs[j + 1] = l


@njit(cache=True)
def _build_tree(XT, y, mtry, tree_seed, per_tree_subset,
                feature, threshold, left, right, pos_cnt, neg_cnt):
    """Grow one tree on a bootstrap resample; returns its node count.

    Splits minimize weighted Gini impurity over `mtry` candidate features,
    thresholds sit midway between adjacent distinct values, and growth
    stops at purity or when no candidate split strictly improves.
    """
    n_features, n = XT.shape
    state = np.empty(1, dtype=np.uint64)
    state[0] = tree_seed

    idx = np.empty(n, dtype=np.int64)
    for t in range(n):
        idx[t] = _randint(state, n)
    idx = np.sort(idx)   # locality only; tree is order-independent

    feat_perm = np.arange(n_features, dtype=np.int64)
    if per_tree_subset:
        for u in range(mtry):
            r = u + _randint(state, n_features - u)
            feat_perm[u], feat_perm[r] = feat_perm[r], feat_perm[u]

    max_nodes = 2 * n + 1
    stack_node = np.empty(max_nodes, dtype=np.int64)
    stack_lo = np.empty(max_nodes, dtype=np.int64)
    stack_hi = np.empty(max_nodes, dtype=np.int64)
    sort_lo = np.empty(64, dtype=np.int64)
    sort_hi = np.empty(64, dtype=np.int64)
    scratch = np.empty(n, dtype=np.int64)
    vals = np.empty(n, dtype=np.float64)
    labs = np.empty(n, dtype=np.uint8)
    ybuf = np.empty(n, dtype=np.uint8)

    stack_node[0] = 0
    stack_lo[0] = 0
    stack_hi[0] = n
    top = 1
    n_nodes = 1

    while top > 0:
        top -= 1
        node = stack_node[top]
        lo = stack_lo[top]
        hi = stack_hi[top]
        cnt = hi - lo

        pos = 0
        for t in range(cnt):
            lab = y[idx[lo + t]]
            ybuf[t] = lab
            pos += lab
        neg = cnt - pos
        feature[node] = -1
        left[node] = -1
        right[node] = -1
        pos_cnt[node] = pos
        neg_cnt[node] = neg
        if pos == 0 or neg == 0:
            continue

        p1 = pos / cnt
        parent_gini = 1.0 - p1 * p1 - (1.0 - p1) * (1.0 - p1)
        best_score = parent_gini - 1e-12
        best_feat = np.int64(-1)
        best_thr = 0.0

        if not per_tree_subset:
            for u in range(mtry):
                r = u + _randint(state, n_features - u)
                tmp = feat_perm[u]
                feat_perm[u] = feat_perm[r]
                feat_perm[r] = tmp

        for ci in range(mtry):
            f = feat_perm[ci]
            vmin = XT[f, idx[lo]]
            vmax = vmin
            for t in range(cnt):
                v = XT[f, idx[lo + t]]
                vals[t] = v
                labs[t] = ybuf[t]
                if v < vmin:
                    vmin = v
                elif v > vmax:
                    vmax = v
            if vmax <= vmin:
                continue
            _sort_pairs(vals, labs, 0, cnt, sort_lo, sort_hi)
            left_pos = 0
            for t in range(cnt - 1):
                left_pos += labs[t]
                v_here = vals[t]
                v_next = vals[t + 1]
                if v_next > v_here:
                    nl = t + 1
                    nr = cnt - nl
                    pl = left_pos / nl
                    pr = (pos - left_pos) / nr
                    gl = 1.0 - pl * pl - (1.0 - pl) * (1.0 - pl)
                    gr = 1.0 - pr * pr - (1.0 - pr) * (1.0 - pr)
                    score = (nl * gl + nr * gr) / cnt
                    if score < best_score:
                        best_score = score
                        best_feat = f
                        best_thr = v_here + 0.5 * (v_next - v_here)

        if best_feat < 0:
            continue

        nl = 0
        for t in range(lo, hi):
            if XT[best_feat, idx[t]] <= best_thr:
                scratch[nl] = idx[t]
                nl += 1
        nr = nl
        for t in range(lo, hi):
            if XT[best_feat, idx[t]] > best_thr:
                scratch[nr] = idx[t]
                nr += 1
        for t in range(cnt):
            idx[lo + t] = scratch[t]

        left_id = n_nodes
        right_id = n_nodes + 1
        n_nodes += 2
        feature[node] = best_feat
        threshold[node] = best_thr
        left[node] = left_id
        right[node] = right_id
        stack_node[top] = left_id
        stack_lo[top] = lo
        stack_hi[top] = lo + nl
        top += 1
        stack_node[top] = right_id
        stack_lo[top] = lo + nl
        stack_hi[top] = hi
        top += 1

    return n_nodes


@njit(cache=True)
def _build_chunk(XT, y, mtry, seeds, per_tree_subset,
                 feature, threshold, left, right, pos_cnt, neg_cnt, counts):
    for t in range(seeds.shape[0]):
        counts[t] = _build_tree(XT, y, mtry, seeds[t], per_tree_subset,
                                feature[t], threshold[t], left[t], right[t],
                                pos_cnt[t], neg_cnt[t])


@njit(cache=True, parallel=True)
def _build_chunk_parallel(XT, y, mtry, seeds, per_tree_subset,
                          feature, threshold, left, right, pos_cnt, neg_cnt, counts):
    for t in prange(seeds.shape[0]):
        counts[t] = _build_tree(XT, y, mtry, seeds[t], per_tree_subset,
                                feature[t], threshold[t], left[t], right[t],
                                pos_cnt[t], neg_cnt[t])


@njit(cache=True)
def _positive_votes(feature, threshold, left, right, pos_cnt, neg_cnt, offsets, X):
    """Number of trees voting positive per row (leaf ties vote positive)."""
    m = X.shape[0]
    n_trees = offsets.shape[0] - 1
    votes = np.zeros(m, dtype=np.int64)
    for s in range(m):
        hits = 0
        for t in range(n_trees):
            base = offsets[t]
            node = np.int64(0)
            while feature[base + node] >= 0:
                if X[s, feature[base + node]] <= threshold[base + node]:
                    node = left[base + node]
                else:
                    node = right[base + node]
            if pos_cnt[base + node] >= neg_cnt[base + node]:
                hits += 1
        votes[s] = hits
    return votes


@njit(cache=True)
def _oob_votes(feature, threshold, left, right, pos_cnt, neg_cnt, offsets,
               seeds, X):
    """Out-of-bag vote tallies, re-deriving each bootstrap from its seed."""
    n = X.shape[0]
    n_trees = offsets.shape[0] - 1
    pos_votes = np.zeros(n, dtype=np.int64)
    tot_votes = np.zeros(n, dtype=np.int64)
    inbag = np.zeros(n, dtype=np.uint8)
    state = np.empty(1, dtype=np.uint64)
    for t in range(n_trees):
        for s in range(n):
            inbag[s] = 0
        state[0] = seeds[t]
        for _ in range(n):
            inbag[_randint(state, n)] = 1
        base = offsets[t]
        for s in range(n):
            if inbag[s]:
                continue
            node = np.int64(0)
            while feature[base + node] >= 0:
                if X[s, feature[base + node]] <= threshold[base + node]:
                    node = left[base + node]
                else:
                    node = right[base + node]
            tot_votes[s] += 1
            if pos_cnt[base + node] >= neg_cnt[base + node]:
                pos_votes[s] += 1
    return pos_votes, tot_votes
