"""Scratch: per-(n, K) greedy-vs-global mismatch rates; LW-vs-stepwise oracle."""
import sys
sys.path.insert(0, "src")
import numpy as np
from itertools import combinations
from crowdcast.clustering import WardClusterer, ks_distance_matrix
from scratch_ward import partitions_exact_k, ward_objective, canon, labels_to_partition

print("=== greedy vs GLOBAL exhaustive, KS family ===")
for n in range(3, 8):
    for k in (2, 3):
        if k > n:
            continue
        bad = 0
        T = 200
        for seed in range(T):
            rng = np.random.default_rng(10_000 * n + 100 * k + seed)
            samples = [rng.exponential(1.0, size=int(rng.integers(5, 30))) for _ in range(n)]
            d = ks_distance_matrix(samples)
            greedy = labels_to_partition(WardClusterer(n_clusters=k).fit_predict(d))
            best, best_obj = None, np.inf
            for p in partitions_exact_k(list(range(n)), k):
                obj = ward_objective(p, d)
                if obj < best_obj - 1e-12:
                    best_obj, best = obj, p
            if canon(greedy) != canon(best):
                bad += 1
        print(f"n={n} K={k}: mismatch {bad}/{T}")

print("=== LW recurrence vs STEPWISE-exhaustive objective-delta oracle ===")
def stepwise(d, K):
    n = d.shape[0]
    parts = [[i] for i in range(n)]
    while len(parts) > K:
        best_key, best_pair = None, None
        for ai, bi in combinations(range(len(parts)), 2):
            merged = parts[:ai] + parts[ai+1:bi] + parts[bi+1:] + [sorted(parts[ai] + parts[bi])]
            delta = ward_objective([parts[ai] + parts[bi]], d) - ward_objective([parts[ai]], d) - ward_objective([parts[bi]], d)
            key = (delta, min(parts[ai] + parts[bi]), max(min(parts[ai]), min(parts[bi])))
            # tie-break identical to production: (cost, min-member of first, min-member of second)
            a_min, b_min = sorted((min(parts[ai]), min(parts[bi])))
            key = (delta, a_min, b_min)
            if best_key is None or key < best_key:
                best_key, best_pair = key, (ai, bi)
        ai, bi = best_pair
        parts = [p for i, p in enumerate(parts) if i not in (ai, bi)] + [sorted(parts[ai] + parts[bi])]
    return canon(parts)

bad = 0
for seed in range(400):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 10))
    k = int(rng.integers(1, min(4, n) + 1))
    m = rng.uniform(0, 1, size=(n, n))
    d = np.triu(m, 1); d = d + d.T
    mine = canon(labels_to_partition(WardClusterer(n_clusters=k).fit_predict(d)))
    if mine != stepwise(d, k):
        bad += 1
        if bad < 4:
            print("stepwise mismatch at seed", seed)
print("LW vs stepwise mismatches:", bad, "/400")
