"""Random forest of bagged binary decision trees with vote-fraction scoring.

Each of the (default 500) trees trains on a bootstrap resample of the
instances, sampling floor(sqrt(n_features)) candidate features at every
split by default; Gini impurity picks the split and growth continues to
purity or until no split improves. The fraction of trees voting positive
serves as a risk score, and an instance is predicted positive when that
fraction meets the tuned vote threshold (inclusive).

Training is deterministic given (data, params, seed); parallel chunked
training produces the identical forest because every tree depends only on
its own derived sub-seed.
"""

from __future__ import annotations

import json
import math

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from . import _forest_engine as engine
from .errors import SchemaMismatchError, ValidationError
from .tuning import TEMPORAL, ThresholdSearch, crossval_threshold

MODEL_FORMAT = "crowdcast-forest/1"

PER_SPLIT = "per_split"     # fresh candidate features at every split
PER_TREE = "per_tree"       # one fixed feature subset per tree


def _validate_xy(X, y):
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValidationError(f"expected a nonempty 2-d feature matrix, got shape {X.shape}")
    if not np.isfinite(X).all():
        raise ValidationError("feature matrix contains non-finite values")
    y = np.asarray(y)
    if set(np.unique(y)) - {0, 1, False, True}:
        raise ValidationError("labels must be binary (0/1)")
    y = y.astype(np.uint8)
    if y.shape != (X.shape[0],):
        raise ValidationError(f"labels shape {y.shape} does not match {X.shape[0]} rows")
    for cls in (0, 1):
        if not np.any(y == cls):
            raise ValidationError(f"training data has no instances of class {cls}")
    return X, y


def _validate_matrix(X, n_features):
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != n_features:
        raise ValidationError(f"expected {n_features} features, got shape {X.shape}")
    if not np.isfinite(X).all():
        raise ValidationError("feature matrix contains non-finite values")
    return X


class VoteForestClassifier(BaseEstimator, ClassifierMixin):
    """Bagged decision trees thresholding the positive-vote fraction.

    Parameters
    ----------
    n_trees : forest size (default 500).
    mtry : candidate features per split; None means floor(sqrt(n_features)).
    vote_threshold : minimum positive-vote fraction for a positive call.
    seed : master seed; every tree derives its own sub-seed from it.
    feature_sampling : "per_split" (default) resamples candidates at every
        node; "per_tree" fixes one subset per tree.
    parallel : train tree chunks across threads (identical result).
    """

    def __init__(self, n_trees: int = 500, mtry: int | None = None,
                 vote_threshold: float = 0.5, seed: int = 0,
                 feature_sampling: str = PER_SPLIT, parallel: bool = False,
                 chunk_size: int = 16):
        self.n_trees = n_trees
        self.mtry = mtry
        self.vote_threshold = vote_threshold
        self.seed = seed
        self.feature_sampling = feature_sampling
        self.parallel = parallel
        self.chunk_size = chunk_size

    # -- training ---------------------------------------------------------

    def fit(self, X, y, schema_fingerprint: str | None = None):
        if self.n_trees < 1:
            raise ValidationError("n_trees must be >= 1")
        if not 0.0 <= self.vote_threshold <= 1.0:
            raise ValidationError("vote_threshold must lie in [0, 1]")
        if self.feature_sampling not in (PER_SPLIT, PER_TREE):
            raise ValidationError(f"unknown feature_sampling {self.feature_sampling!r}")
        X, y = _validate_xy(X, y)
        n, n_features = X.shape
        mtry = self.mtry if self.mtry is not None else max(1, int(math.isqrt(n_features)))
        if not 1 <= mtry <= n_features:
            raise ValidationError(f"mtry must lie in 1..{n_features}, got {mtry}")

        seeds = engine._derive_seeds(self.seed, self.n_trees, 0)
        per_tree = self.feature_sampling == PER_TREE
        XT = np.ascontiguousarray(X.T)
        max_nodes = 2 * n + 1
        chunk = max(1, int(self.chunk_size))
        feats, thrs, lefts, rights, poss, negs, sizes = [], [], [], [], [], [], []
        build = engine._build_chunk_parallel if self.parallel else engine._build_chunk
        for start in range(0, self.n_trees, chunk):
            csize = min(chunk, self.n_trees - start)
            buf_f = np.empty((csize, max_nodes), dtype=np.int64)
            buf_t = np.zeros((csize, max_nodes), dtype=np.float64)
            buf_l = np.empty((csize, max_nodes), dtype=np.int64)
            buf_r = np.empty((csize, max_nodes), dtype=np.int64)
            buf_p = np.empty((csize, max_nodes), dtype=np.int64)
            buf_n = np.empty((csize, max_nodes), dtype=np.int64)
            counts = np.empty(csize, dtype=np.int64)
            build(XT, y, mtry, seeds[start:start + csize], per_tree,
                  buf_f, buf_t, buf_l, buf_r, buf_p, buf_n, counts)
            for t in range(csize):
                m = counts[t]
                feats.append(buf_f[t, :m].copy())
                thrs.append(buf_t[t, :m].copy())
                lefts.append(buf_l[t, :m].copy())
                rights.append(buf_r[t, :m].copy())
                poss.append(buf_p[t, :m].copy())
                negs.append(buf_n[t, :m].copy())
                sizes.append(m)

        self.tree_offsets_ = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
        self.tree_features_ = np.concatenate(feats)
        self.tree_thresholds_ = np.concatenate(thrs)
        self.tree_left_ = np.concatenate(lefts)
        self.tree_right_ = np.concatenate(rights)
        self.tree_pos_ = np.concatenate(poss)
        self.tree_neg_ = np.concatenate(negs)
        self.tree_seeds_ = np.asarray(seeds, dtype=np.uint64)
        self.n_features_in_ = n_features
        self.mtry_ = mtry
        self.classes_ = np.array([0, 1])
        self.schema_fingerprint_ = schema_fingerprint
        return self

    # -- scoring ----------------------------------------------------------

    def _check_schema(self, schema_fingerprint):
        if schema_fingerprint is not None and self.schema_fingerprint_ is not None \
                and schema_fingerprint != self.schema_fingerprint_:
            raise SchemaMismatchError(
                f"model was trained under schema {self.schema_fingerprint_}, "
                f"instances carry {schema_fingerprint}")

    def vote_fractions(self, X, schema_fingerprint: str | None = None) -> np.ndarray:
        """Fraction of trees voting positive per row (leaf ties positive)."""
        check_is_fitted(self, "tree_offsets_")
        self._check_schema(schema_fingerprint)
        X = _validate_matrix(X, self.n_features_in_)
        votes = engine._positive_votes(
            self.tree_features_, self.tree_thresholds_, self.tree_left_,
            self.tree_right_, self.tree_pos_, self.tree_neg_,
            self.tree_offsets_, X)
        return votes / len(self)

    def predict(self, X, schema_fingerprint: str | None = None) -> np.ndarray:
        return self.vote_fractions(X, schema_fingerprint) >= self.vote_threshold

    def predict_proba(self, X) -> np.ndarray:
        f = self.vote_fractions(X)
        return np.column_stack([1.0 - f, f])

    def oob_vote_fractions(self, X, y=None) -> np.ndarray:
        """Out-of-bag vote fractions on the training matrix (NaN where a row
        was in every bootstrap)."""
        check_is_fitted(self, "tree_offsets_")
        X = _validate_matrix(X, self.n_features_in_)
        pos, tot = engine._oob_votes(
            self.tree_features_, self.tree_thresholds_, self.tree_left_,
            self.tree_right_, self.tree_pos_, self.tree_neg_,
            self.tree_offsets_, self.tree_seeds_, X)
        out = np.full(X.shape[0], np.nan)
        seen = tot > 0
        out[seen] = pos[seen] / tot[seen]
        return out

    def __len__(self) -> int:
        return self.tree_offsets_.shape[0] - 1

    # -- persistence --------------------------------------------------------

    def save(self, path) -> None:
        check_is_fitted(self, "tree_offsets_")
        meta = {
            "format": MODEL_FORMAT,
            "n_trees": self.n_trees,
            "mtry": self.mtry_,
            "vote_threshold": self.vote_threshold,
            "seed": self.seed,
            "feature_sampling": self.feature_sampling,
            "n_features_in": self.n_features_in_,
            "schema_fingerprint": self.schema_fingerprint_,
        }
        np.savez_compressed(
            path,
            meta=np.frombuffer(json.dumps(meta, sort_keys=True).encode(), dtype=np.uint8),
            offsets=self.tree_offsets_,
            features=self.tree_features_,
            thresholds=self.tree_thresholds_,
            left=self.tree_left_,
            right=self.tree_right_,
            pos=self.tree_pos_,
            neg=self.tree_neg_,
            seeds=self.tree_seeds_,
        )

    @classmethod
    def load(cls, path) -> "VoteForestClassifier":
        with np.load(path) as data:
            meta = json.loads(bytes(data["meta"]).decode())
            if meta.get("format") != MODEL_FORMAT:
                raise ValidationError(f"not a {MODEL_FORMAT} file: {path}")
            model = cls(
                n_trees=meta["n_trees"],
                mtry=None,
                vote_threshold=meta["vote_threshold"],
                seed=meta["seed"],
                feature_sampling=meta["feature_sampling"],
            )
            model.tree_offsets_ = data["offsets"]
            model.tree_features_ = data["features"]
            model.tree_thresholds_ = data["thresholds"]
            model.tree_left_ = data["left"]
            model.tree_right_ = data["right"]
            model.tree_pos_ = data["pos"]
            model.tree_neg_ = data["neg"]
            model.tree_seeds_ = data["seeds"]
            model.n_features_in_ = meta["n_features_in"]
            model.mtry_ = meta["mtry"]
            model.classes_ = np.array([0, 1])
            model.schema_fingerprint_ = meta["schema_fingerprint"]
        return model


def default_vote_grid(n_trees: int = 500) -> np.ndarray:
    return np.arange(n_trees + 1) / n_trees


def tune_vote_threshold(
    X, y,
    n_trees: int = 500,
    mtry: int | None = None,
    seed: int = 0,
    folds: int = 4,
    grid=None,
    strategy: str = TEMPORAL,
    feature_sampling: str = PER_SPLIT,
    parallel: bool = False,
) -> ThresholdSearch:
    """Four-fold CV over the vote-fraction threshold, maximizing mean BAC."""
    X, y = _validate_xy(X, y)
    if grid is None:
        grid = default_vote_grid(n_trees)
    fold_seeds = np.asarray(engine._derive_seeds(seed, folds, 1), dtype=np.uint64)

    def factory(X_tr, y_tr, fold):
        model = VoteForestClassifier(
            n_trees=n_trees, mtry=mtry, seed=int(fold_seeds[fold] % np.uint64(2**63)),
            feature_sampling=feature_sampling, parallel=parallel)
        model.fit(X_tr, y_tr)
        return model.vote_fractions

    return crossval_threshold(factory, X, y, grid, folds=folds, strategy=strategy, seed=seed)
