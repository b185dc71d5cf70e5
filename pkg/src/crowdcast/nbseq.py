"""Naive-Bayes sequence mining over quartile-binned lagged features.

The weekly task conditions on thousands of lagged mention levels, far more
than the training rows can pin down jointly, so features are binned into
quartiles of their training marginals and assumed conditionally
independent given the label. Conditional tables are estimated by counting
co-occurrences padded with a symmetric Dirichlet pseudo-count alpha; the
class prior is the plain maximum-likelihood rate. Posteriors are computed
in log space with max-subtraction so thousands of factors cannot
underflow, and an instance is called positive when the posterior meets the
tuned threshold p*.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .errors import SchemaMismatchError, ValidationError
from .tuning import TEMPORAL, ThresholdSearch, crossval_threshold

MODEL_FORMAT = "crowdcast-nb/1"
N_BINS = 4


def _nearest_rank(sorted_values: np.ndarray, fraction: float) -> np.ndarray:
    n = sorted_values.shape[0]
    rank = int(np.ceil(fraction * n))
    return sorted_values[max(rank, 1) - 1]


class QuartileBinner(BaseEstimator, TransformerMixin):
    """Per-feature quartile binning with nearest-rank training edges.

    bin(v) = 1 + #{edges strictly below v}, so a value equal to an edge
    falls in the lower bin and every real maps into 1..4. A constant
    feature degenerates to equal edges (everything at or below them lands
    in bin 1); those columns are listed in `degenerate_`.
    """

    def fit(self, X, y=None):
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[0] == 0:
            raise ValidationError(f"expected a nonempty 2-d matrix, got shape {X.shape}")
        if not np.isfinite(X).all():
            raise ValidationError("binner input contains non-finite values")
        ordered = np.sort(X, axis=0)
        self.edges_ = np.stack([
            _nearest_rank(ordered, 0.25),
            _nearest_rank(ordered, 0.50),
            _nearest_rank(ordered, 0.75),
        ], axis=1)                                   # (F, 3)
        self.degenerate_ = np.flatnonzero(self.edges_[:, 0] == self.edges_[:, 2])
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "edges_")
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.n_features_in_:
            raise ValidationError(f"expected {self.n_features_in_} features, got shape {X.shape}")
        return (1 + (X[:, :, np.newaxis] > self.edges_[np.newaxis]).sum(axis=2)).astype(np.uint8)


class SequenceNaiveBayes(BaseEstimator, ClassifierMixin):
    """Categorical naive Bayes over quartile bins with Dirichlet padding.

    Parameters
    ----------
    alpha : symmetric Dirichlet pseudo-count added to every conditional
        count cell (the prior stays maximum-likelihood).
    posterior_threshold : minimum posterior for a positive call (p*).
    """

    def __init__(self, alpha: float = 1.0, posterior_threshold: float = 0.5):
        self.alpha = alpha
        self.posterior_threshold = posterior_threshold

    def fit(self, B, y, schema_fingerprint: str | None = None):
        if self.alpha <= 0:
            raise ValidationError("alpha must be positive")
        B = np.asarray(B)
        y = np.asarray(y).astype(np.int8)
        if B.ndim != 2 or B.shape[0] == 0:
            raise ValidationError("expected a nonempty 2-d binned matrix")
        if B.min() < 1 or B.max() > N_BINS:
            raise ValidationError("binned values must lie in 1..4")
        if y.shape != (B.shape[0],) or set(np.unique(y)) - {0, 1}:
            raise ValidationError("labels must be binary and aligned with rows")
        n, n_features = B.shape
        counts = np.zeros((n_features, 2, N_BINS))
        for t in (0, 1):
            rows = B[y == t]
            for q in range(1, N_BINS + 1):
                counts[:, t, q - 1] = (rows == q).sum(axis=0)
        class_totals = np.array([(y == 0).sum(), (y == 1).sum()], dtype=float)
        self.class_absent_ = [t for t in (0, 1) if class_totals[t] == 0]
        tables = (counts + self.alpha) / (class_totals[np.newaxis, :, np.newaxis] + N_BINS * self.alpha)
        self.prior_ = float(class_totals[1] / n)
        self.tables_ = tables
        self.log_tables_ = np.log(tables)
        self.n_features_in_ = n_features
        self.schema_fingerprint_ = schema_fingerprint
        return self

    def _scores(self, B) -> np.ndarray:
        """Unnormalized class log-scores, shape (n, 2)."""
        check_is_fitted(self, "tables_")
        B = np.asarray(B)
        if B.ndim != 2 or B.shape[1] != self.n_features_in_:
            raise ValidationError(f"expected {self.n_features_in_} features, got shape {B.shape}")
        if B.min() < 1 or B.max() > N_BINS:
            raise ValidationError("binned values must lie in 1..4")
        with np.errstate(divide="ignore"):
            log_prior = np.log(np.array([1.0 - self.prior_, self.prior_]))
        idx = (B - 1).astype(np.int64)                       # (n, F)
        scores = np.empty((B.shape[0], 2))
        for t in (0, 1):
            table = self.log_tables_[:, t, :]                # (F, 4)
            scores[:, t] = np.take_along_axis(table.T, idx, axis=0).sum(axis=1) + log_prior[t]
        return scores

    def posteriors(self, B, schema_fingerprint: str | None = None) -> np.ndarray:
        """P(label=1 | binned features), computed stably in log space."""
        if schema_fingerprint is not None and self.schema_fingerprint_ is not None \
                and schema_fingerprint != self.schema_fingerprint_:
            raise SchemaMismatchError(
                f"model was trained under schema {self.schema_fingerprint_}, "
                f"instances carry {schema_fingerprint}")
        scores = self._scores(B)
        peak = scores.max(axis=1, keepdims=True)
        stable = np.exp(scores - peak)
        return stable[:, 1] / stable.sum(axis=1)

    def predict(self, B, schema_fingerprint: str | None = None) -> np.ndarray:
        return self.posteriors(B, schema_fingerprint) >= self.posterior_threshold

    def top_features(self, m: int | None = None) -> list:
        """Features ranked by their strongest log-likelihood-ratio swing.

        Returns (feature index, lift) pairs where lift is
        max over bins of |log P(bin | positive) - log P(bin | negative)|.
        """
        check_is_fitted(self, "tables_")
        lift = np.abs(self.log_tables_[:, 1, :] - self.log_tables_[:, 0, :]).max(axis=1)
        order = np.lexsort((np.arange(lift.size), -lift))
        ranked = [(int(i), float(lift[i])) for i in order]
        return ranked if m is None else ranked[:m]

    # -- persistence ------------------------------------------------------

    def save(self, path, binner: QuartileBinner | None = None) -> None:
        check_is_fitted(self, "tables_")
        lines = [f"# {MODEL_FORMAT}"]
        lines.append(f"prior\t{self.prior_!r}")
        lines.append(f"alpha\t{self.alpha!r}")
        lines.append(f"pstar\t{self.posterior_threshold!r}")
        lines.append(f"n_features\t{self.n_features_in_}")
        lines.append(f"fingerprint\t{self.schema_fingerprint_ or ''}")
        for j in range(self.n_features_in_):
            edge_text = ""
            if binner is not None:
                edge_text = "\t".join(repr(float(e)) for e in binner.edges_[j])
            t0 = "\t".join(repr(float(v)) for v in self.tables_[j, 0])
            t1 = "\t".join(repr(float(v)) for v in self.tables_[j, 1])
            lines.append(f"feature\t{j}\t{edge_text}\t{t0}\t{t1}")
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path) -> tuple["SequenceNaiveBayes", QuartileBinner]:
        with open(path) as fh:
            lines = [ln.rstrip("\n") for ln in fh]
        if not lines or lines[0] != f"# {MODEL_FORMAT}":
            raise ValidationError(f"not a {MODEL_FORMAT} file: {path}")
        head = {}
        feat_lines = []
        for line in lines[1:]:
            if not line:
                continue
            parts = line.split("\t")
            if parts[0] == "feature":
                feat_lines.append(parts)
            else:
                head[parts[0]] = parts[1]
        n_features = int(head["n_features"])
        model = cls(alpha=float(head["alpha"]), posterior_threshold=float(head["pstar"]))
        model.prior_ = float(head["prior"])
        model.n_features_in_ = n_features
        model.schema_fingerprint_ = head.get("fingerprint") or None
        model.tables_ = np.empty((n_features, 2, N_BINS))
        edges = np.empty((n_features, 3))
        has_edges = True
        for parts in feat_lines:
            j = int(parts[1])
            rest = parts[2:]
            if len(rest) == 3 + 2 * N_BINS:
                edges[j] = [float(v) for v in rest[:3]]
                rest = rest[3:]
            else:
                has_edges = False
                rest = rest[-2 * N_BINS:]
            model.tables_[j, 0] = [float(v) for v in rest[:N_BINS]]
            model.tables_[j, 1] = [float(v) for v in rest[N_BINS:]]
        model.log_tables_ = np.log(model.tables_)
        model.class_absent_ = []
        binner = QuartileBinner()
        if has_edges:
            binner.edges_ = edges
            binner.degenerate_ = np.flatnonzero(edges[:, 0] == edges[:, 2])
            binner.n_features_in_ = n_features
        return model, binner


def default_posterior_grid() -> np.ndarray:
    return np.round(np.arange(101) / 100, 2)


def tune_posterior_threshold(
    B, y,
    alpha: float = 1.0,
    folds: int = 4,
    grid=None,
    strategy: str = TEMPORAL,
    seed: int = 0,
) -> ThresholdSearch:
    """Four-fold CV over p*, maximizing mean held-out balanced accuracy.

    `B` is already binned; each fold refits only the conditional tables
    (the binner is fit upstream of the tuning loop by the caller when
    end-to-end refitting is wanted).
    """
    if grid is None:
        grid = default_posterior_grid()

    def factory(B_tr, y_tr, fold):
        model = SequenceNaiveBayes(alpha=alpha)
        model.fit(B_tr, y_tr)
        return model.posteriors

    return crossval_threshold(factory, np.asarray(B), np.asarray(y), grid,
                              folds=folds, strategy=strategy, seed=seed)
