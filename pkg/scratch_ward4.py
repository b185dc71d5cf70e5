"""Scratch: pre-registered criterion-3 configuration, measured honestly.

seed 0, 50 trials, n ~ U{3..7}, K ~ U{2,3}, KS matrices of random samples,
match = greedy objective equals exhaustive minimum within 1e-12.
"""
import sys
sys.path.insert(0, "src")
import numpy as np
from crowdcast.clustering import WardClusterer, ks_distance_matrix
from scratch_ward import partitions_exact_k, ward_objective, canon, labels_to_partition

rng = np.random.default_rng(0)
matched = 0
fails = []
for t in range(50):
    n = int(rng.integers(3, 8))
    k = int(rng.integers(2, 4))
    k = min(k, n)
    samples = [rng.exponential(1.0, size=int(rng.integers(5, 30))) for _ in range(n)]
    d = ks_distance_matrix(samples)
    greedy = labels_to_partition(WardClusterer(n_clusters=k).fit_predict(d))
    gobj = ward_objective(greedy, d)
    best_obj = min(ward_objective(p, d) for p in partitions_exact_k(list(range(n)), k))
    if gobj <= best_obj + 1e-12:
        matched += 1
    else:
        fails.append((t, n, k, gobj, best_obj))
print(f"matched {matched}/50")
for f in fails[:10]:
    print("trial %d n=%d K=%d greedy=%.6f exhaustive=%.6f" % f)
