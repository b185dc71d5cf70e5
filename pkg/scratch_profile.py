"""Scratch: where does tree-building time go?"""
import sys, time
sys.path.insert(0, "src")
import numpy as np
from numba import njit
from crowdcast._forest_engine import _sort_pairs, _derive_seeds, _randint, _build_tree

rng = np.random.default_rng(0)
n, F = 11000, 50
X = rng.normal(size=(n, F))
w = rng.normal(size=F)
logits = X @ w * 0.8 + rng.normal(size=n) * 2.0
y = (logits > np.quantile(logits, 0.94)).astype(np.uint8)
XT = np.ascontiguousarray(X.T)

@njit(cache=True)
def tree_stats(XT, y, mtry, tree_seed):
    """Replicate the node traversal, tally sorted elements."""
    n_features, n = XT.shape
    state = np.empty(1, dtype=np.uint64)
    state[0] = tree_seed
    idx = np.empty(n, dtype=np.int64)
    for t in range(n):
        idx[t] = _randint(state, n)
    return idx

# total sorted elements: instrument via python re-walk is costly; instead time
# sort alone at representative sizes
@njit(cache=True)
def sort_bench(vals_all, labs_all, reps, cnt):
    sl = np.empty(64, np.int64); sh = np.empty(64, np.int64)
    acc = 0.0
    for r in range(reps):
        v = vals_all[r % 50, :cnt].copy()
        l = labs_all[r % 50, :cnt].copy()
        _sort_pairs(v, l, 0, cnt, sl, sh)
        acc += v[0]
    return acc

vals_all = rng.normal(size=(50, n))
labs_all = (rng.random((50, n)) < 0.06).astype(np.uint8)
for cnt, reps in ((11000, 200), (1000, 2000), (100, 20000), (25, 80000)):
    sort_bench(vals_all, labs_all, 1, cnt)
    t0 = time.time()
    sort_bench(vals_all, labs_all, reps, cnt)
    dt = time.time() - t0
    print(f"sort cnt={cnt}: {dt/reps*1e6:.1f} us/call, {dt/(reps*cnt)*1e9:.1f} ns/elem")

# time one full tree
fbuf = np.empty(2*n+1, np.int64); tbuf = np.zeros(2*n+1); lbuf = np.empty(2*n+1, np.int64)
rbuf = np.empty(2*n+1, np.int64); pbuf = np.empty(2*n+1, np.int64); nbuf = np.empty(2*n+1, np.int64)
seeds = _derive_seeds(7, 500, 0)
_build_tree(XT, y, 7, seeds[0], False, fbuf, tbuf, lbuf, rbuf, pbuf, nbuf)
t0 = time.time()
for t in range(20):
    _build_tree(XT, y, 7, seeds[t], False, fbuf, tbuf, lbuf, rbuf, pbuf, nbuf)
print("per tree: %.1f ms" % ((time.time() - t0) / 20 * 1000))
