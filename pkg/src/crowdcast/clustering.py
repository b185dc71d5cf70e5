"""Entity clustering: Kolmogorov-Smirnov distances + Ward agglomeration.

Entities are compared by the empirical distributions of their training
significance values, ignoring time: the distance is the classical
two-sample KS statistic (sup-norm between empirical CDFs). Entities are
then merged agglomeratively under Ward's objective, run directly on the
precomputed distance matrix via the Lance-Williams recurrence, and cut at
floor(2*sqrt(n)) clusters.
"""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator

from .errors import ValidationError

WARD_D2 = "d2"    # recurrence applied to squared dissimilarities
WARD_D = "d"      # recurrence applied to the dissimilarities as given


def default_cluster_count(n_entities: int) -> int:
    return int(math.floor(2.0 * math.sqrt(n_entities)))


def ks_distance(sample_a, sample_b) -> float:
    """Two-sample Kolmogorov-Smirnov statistic, exact via a sorted merge.

    The sup over z of |ECDF_a(z) - ECDF_b(z)| is attained at a sample
    point, so scanning the merged sorted samples suffices.
    """
    a = np.sort(np.asarray(sample_a, dtype=float))
    b = np.sort(np.asarray(sample_b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise ValidationError("ks_distance requires nonempty samples")
    grid = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, grid, side="right") / a.size
    cdf_b = np.searchsorted(b, grid, side="right") / b.size
    return float(np.abs(cdf_a - cdf_b).max())


def ks_distance_matrix(samples: list) -> np.ndarray:
    """Symmetric zero-diagonal matrix of pairwise KS distances."""
    n = len(samples)
    d = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d[i, j] = d[j, i] = ks_distance(samples[i], samples[j])
    return d


def check_distance_matrix(d: np.ndarray) -> np.ndarray:
    d = np.asarray(d, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ValidationError(f"distance matrix must be square, got shape {d.shape}")
    if not np.allclose(d, d.T, atol=1e-12):
        raise ValidationError("distance matrix is not symmetric")
    if np.any(np.diag(d) != 0.0):
        raise ValidationError("distance matrix has nonzero diagonal")
    if np.any(d < 0):
        raise ValidationError("distance matrix has negative entries")
    return d


class WardClusterer(BaseEstimator):
    """Agglomerative Ward clustering on a precomputed distance matrix.

    Parameters
    ----------
    n_clusters : number of clusters to cut the merge tree at.
    variant : "d2" (default) runs the Lance-Williams recurrence on squared
        dissimilarities, consistent with Ward's variance objective; "d"
        runs it on the dissimilarities as given.

    After fit, `labels_` holds cluster ids 1..n_clusters, canonicalized so
    cluster 1 contains the lowest entity index. Merges are deterministic:
    ties pick the lexicographically smallest (min-member, min-member) pair.
    """

    def __init__(self, n_clusters: int = 2, variant: str = WARD_D2):
        self.n_clusters = n_clusters
        self.variant = variant

    def fit(self, X, y=None):
        d = check_distance_matrix(X)
        n = d.shape[0]
        if not 1 <= self.n_clusters <= n:
            raise ValidationError(f"need 1 <= n_clusters <= {n}, got {self.n_clusters}")
        if self.variant not in (WARD_D2, WARD_D):
            raise ValidationError(f"unknown Ward variant {self.variant!r}")
        work = d ** 2 if self.variant == WARD_D2 else d.copy()
        members = [[i] for i in range(n)]
        sizes = [1] * n
        active = list(range(n))
        while len(active) > self.n_clusters:
            best = None
            best_pair = None
            for ai in range(len(active)):
                for bi in range(ai + 1, len(active)):
                    a, b = active[ai], active[bi]
                    key = (work[a, b], members[a][0], members[b][0])
                    if best is None or key < best:
                        best = key
                        best_pair = (a, b)
            a, b = best_pair
            na, nb = sizes[a], sizes[b]
            for c in active:
                if c in (a, b):
                    continue
                nc = sizes[c]
                new = ((na + nc) * work[a, c] + (nb + nc) * work[b, c] - nc * work[a, b]) / (na + nb + nc)
                work[a, c] = work[c, a] = new
            members[a] = sorted(members[a] + members[b])
            sizes[a] = na + nb
            active.remove(b)
        clusters = sorted((members[a] for a in active), key=lambda m: m[0])
        labels = np.empty(n, dtype=np.int64)
        for cid, member_list in enumerate(clusters, start=1):
            for m in member_list:
                labels[m] = cid
        self.labels_ = labels
        self.n_entities_ = n
        return self

    def fit_predict(self, X, y=None) -> np.ndarray:
        return self.fit(X).labels_


def cluster_onehot(labels: np.ndarray, n_clusters: int) -> np.ndarray:
    """Indicator unit vectors of cluster membership, one row per entity."""
    labels = np.asarray(labels)
    if labels.min() < 1 or labels.max() > n_clusters:
        raise ValidationError("cluster ids must lie in 1..n_clusters")
    out = np.zeros((labels.shape[0], n_clusters))
    out[np.arange(labels.shape[0]), labels - 1] = 1.0
    return out
