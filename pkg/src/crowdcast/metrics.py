"""Confusion counts, balanced accuracy, and ROC/AUC analysis.

Balanced accuracy is the unweighted mean of the true positive and true
negative rates, so it cannot be inflated by always predicting the majority
class. A rate whose denominator is zero (no positives, or no negatives)
contributes 0.5 and is flagged rather than raising.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def positives(self) -> int:
        return self.tp + self.fn

    @property
    def negatives(self) -> int:
        return self.tn + self.fp


def confusion(predictions, labels) -> ConfusionCounts:
    p = np.asarray(predictions, dtype=bool)
    t = np.asarray(labels, dtype=bool)
    if p.shape != t.shape:
        raise ValidationError(f"predictions {p.shape} and labels {t.shape} not aligned")
    return ConfusionCounts(
        tp=int(np.sum(p & t)),
        fp=int(np.sum(p & ~t)),
        tn=int(np.sum(~p & ~t)),
        fn=int(np.sum(~p & t)),
    )


@dataclass(frozen=True)
class Rates:
    tpr: float
    tnr: float
    tpr_defined: bool
    tnr_defined: bool

    @property
    def bac(self) -> float:
        return 0.5 * (self.tpr + self.tnr)

    @property
    def flagged(self) -> bool:
        return not (self.tpr_defined and self.tnr_defined)


def rates(counts: ConfusionCounts) -> Rates:
    pos, neg = counts.positives, counts.negatives
    return Rates(
        tpr=counts.tp / pos if pos else 0.5,
        tnr=counts.tn / neg if neg else 0.5,
        tpr_defined=pos > 0,
        tnr_defined=neg > 0,
    )


def bac(counts: ConfusionCounts) -> float:
    return rates(counts).bac


@dataclass
class RocCurve:
    """Achievable (FPR, TPR) pairs as the score threshold sweeps, sorted by
    FPR, with both endpoints (0,0) and (1,1) included."""

    points: np.ndarray            # (m, 2) columns FPR, TPR
    thresholds: np.ndarray        # (m,) threshold giving each point (+inf first)


def roc(scores, labels) -> RocCurve:
    s = np.asarray(scores, dtype=float)
    t = np.asarray(labels, dtype=bool)
    if s.shape != t.shape or s.ndim != 1:
        raise ValidationError("scores and labels must be aligned 1-d arrays")
    pos = int(t.sum())
    neg = int(t.size - pos)
    if pos == 0 or neg == 0:
        raise ValidationError("ROC needs at least one positive and one negative label")
    order = np.argsort(-s, kind="stable")
    sorted_scores = s[order]
    tps = np.cumsum(t[order])
    fps = np.cumsum(~t[order])
    distinct = np.nonzero(np.diff(sorted_scores))[0]
    last = np.concatenate([distinct, [s.size - 1]])
    fpr = np.concatenate([[0.0], fps[last] / neg])
    tpr = np.concatenate([[0.0], tps[last] / pos])
    thresholds = np.concatenate([[np.inf], sorted_scores[last]])
    return RocCurve(np.column_stack([fpr, tpr]), thresholds)


def auc(curve: RocCurve) -> float:
    x = curve.points[:, 0]
    y = curve.points[:, 1]
    return float(np.trapezoid(y, x))


def _upper_hull(points: np.ndarray) -> np.ndarray:
    """Upper convex hull of the point set, left to right."""
    pts = points[np.lexsort((points[:, 1], points[:, 0]))]
    hull: list = []
    for p in pts:
        while len(hull) >= 2:
            o, a = hull[-2], hull[-1]
            cross = (a[0] - o[0]) * (p[1] - o[1]) - (a[1] - o[1]) * (p[0] - o[0])
            if cross >= 0:          # a is on or below chord o->p
                hull.pop()
            else:
                break
        hull.append(p)
    return np.array(hull)


def hull_auc(curve: RocCurve) -> float:
    """Area under the upper convex hull: rates achievable by randomizing
    between two thresholds."""
    pts = np.vstack([curve.points, [[0.0, 0.0], [1.0, 1.0]]])
    hull = _upper_hull(pts)
    return float(np.trapezoid(hull[:, 1], hull[:, 0]))
