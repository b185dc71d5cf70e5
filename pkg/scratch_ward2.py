"""Scratch: my LW ward.D2 agglomeration vs scipy's ward linkage."""
import sys
sys.path.insert(0, "src")
import numpy as np
from scipy.cluster.hierarchy import linkage, fcluster
from scipy.spatial.distance import squareform
from crowdcast.clustering import WardClusterer

def canon(labels):
    blocks = {}
    for i, l in enumerate(labels):
        blocks.setdefault(l, []).append(i)
    return frozenset(frozenset(b) for b in blocks.values())

mismatch = 0
for seed in range(300):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 12))
    k = int(rng.integers(2, min(4, n) + 1))
    pts = rng.uniform(0, 10, size=(n, 3))
    d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
    mine = WardClusterer(n_clusters=k).fit_predict(d)
    Z = linkage(squareform(d, checks=False), method="ward")
    ref = fcluster(Z, t=k, criterion="maxclust")
    if canon(mine) != canon(ref):
        mismatch += 1
        if mismatch <= 3:
            print("mismatch seed", seed, mine, ref)
print("scipy-vs-mine mismatches:", mismatch, "/300")
