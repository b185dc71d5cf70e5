"""Scratch: forest engine speed + determinism checks at benchmark scale."""
import sys, time
sys.path.insert(0, "src")
import numpy as np
from crowdcast.forest import VoteForestClassifier

rng = np.random.default_rng(0)
n, F = 11000, 50
X = rng.normal(size=(n, F))
w = rng.normal(size=F)
logits = X @ w * 0.8 + rng.normal(size=n) * 2.0
y = (logits > np.quantile(logits, 0.94)).astype(np.uint8)
print("positives:", y.mean())

t0 = time.time()
m = VoteForestClassifier(n_trees=20, seed=7).fit(X, y)
print("compile+20 trees: %.1f s" % (time.time() - t0))

t0 = time.time()
m = VoteForestClassifier(n_trees=500, seed=7).fit(X, y)
t_fit = time.time() - t0
print("500 trees sequential: %.1f s" % t_fit)

t0 = time.time()
mp = VoteForestClassifier(n_trees=500, seed=7, parallel=True).fit(X, y)
print("500 trees parallel: %.1f s" % (time.time() - t0))

same = (np.array_equal(m.tree_features_, mp.tree_features_)
        and np.array_equal(m.tree_thresholds_, mp.tree_thresholds_)
        and np.array_equal(m.tree_offsets_, mp.tree_offsets_))
print("parallel == sequential:", same)

Xt = rng.normal(size=(3000, F))
t0 = time.time()
vf = m.vote_fractions(Xt)
print("predict 3000: %.2f s, mean vf %.3f" % (time.time() - t0, vf.mean()))

m2 = VoteForestClassifier(n_trees=500, seed=7).fit(X, y)
print("same-seed refit identical:", np.array_equal(m.tree_thresholds_, m2.tree_thresholds_))
print("nodes total:", m.tree_offsets_[-1], "mean/tree:", m.tree_offsets_[-1] / 500)

t0 = time.time()
oob = m.oob_vote_fractions(X)
acc = ((oob >= 0.5) == y)[~np.isnan(oob)].mean()
print("oob pass: %.1f s, oob acc %.3f" % (time.time() - t0, acc))
