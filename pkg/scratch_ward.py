"""Scratch: greedy Ward (LW d2) vs exhaustive partition minimization."""
import sys
sys.path.insert(0, "src")
import numpy as np
from itertools import combinations
from crowdcast.clustering import WardClusterer, ks_distance_matrix


def partitions_exact_k(items, k):
    if k == 1:
        yield [list(items)]
        return
    if len(items) == k:
        yield [[x] for x in items]
        return
    first, rest = items[0], items[1:]
    # first in its own block
    for p in partitions_exact_k(rest, k - 1):
        yield [[first]] + p
    # first joins an existing block
    for p in partitions_exact_k(rest, k):
        for i in range(len(p)):
            yield p[:i] + [[first] + p[i]] + p[i + 1:]


def ward_objective(partition, d):
    total = 0.0
    for block in partition:
        if len(block) < 2:
            continue
        s = 0.0
        for a, b in combinations(block, 2):
            s += d[a, b] ** 2
        total += s / len(block)
    return total


def canon(partition):
    return frozenset(frozenset(b) for b in partition)


def labels_to_partition(labels):
    blocks = {}
    for i, l in enumerate(labels):
        blocks.setdefault(l, []).append(i)
    return list(blocks.values())


def trial(d, k):
    greedy = labels_to_partition(WardClusterer(n_clusters=k).fit_predict(d))
    best, best_obj = None, np.inf
    for p in partitions_exact_k(list(range(d.shape[0])), k):
        obj = ward_objective(p, d)
        if obj < best_obj - 1e-12:
            best_obj, best = obj, p
    return canon(greedy) == canon(best), ward_objective(greedy, d), best_obj


def run(kind, seeds):
    mismatches = 0
    trials = 0
    for seed in seeds:
        rng = np.random.default_rng(seed)
        n = int(rng.integers(3, 8))
        k = int(rng.integers(1, min(3, n) + 1))
        if kind == "uniform":
            m = rng.uniform(0, 1, size=(n, n))
            d = np.triu(m, 1)
            d = d + d.T
        elif kind == "ks":
            samples = [rng.exponential(1.0, size=int(rng.integers(5, 30))) for _ in range(n)]
            d = ks_distance_matrix(samples)
        elif kind == "points1d":
            pts = rng.uniform(0, 10, size=(n, 1))
            d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
        elif kind == "points2d":
            pts = rng.uniform(0, 10, size=(n, 2))
            d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
        ok, gobj, bobj = trial(d, k)
        trials += 1
        if not ok:
            mismatches += 1
    print(f"{kind}: {trials - mismatches}/{trials} matched")


for kind in ("uniform", "ks", "points1d", "points2d"):
    run(kind, range(400))
