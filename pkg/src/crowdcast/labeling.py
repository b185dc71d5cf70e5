"""Significance series and binary ground-truth labels.

A "significant" event period is one whose smoothed, de-trended same-day
mainstream reporting meets or exceeds a threshold (inclusive >=). Day-level
tasks smooth with a three-day moving average and, on the relative scale,
divide by the entity's training mean first; week-level tasks threshold the
same-week series directly, with the threshold picked so that a target
fraction of training weeks comes out positive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .detrend import BaselineMean, DailyNormalized, WeeklyNormalized
from .errors import ValidationError

DEFAULT_THETA = 2.875
WEEKLY_POSITIVE_FRACTION = 0.15


@dataclass
class SignificanceSeries:
    """Three-day smoothed reporting level per entity; NaN where undefined."""

    entities: list[str]
    values: np.ndarray           # (C, T)
    theta: float

    def row(self, entity: str) -> int:
        return self.entities.index(entity)

    def significant(self, entity: str, i: int) -> bool:
        v = self.values[self.row(entity), i]
        if np.isnan(v):
            raise ValidationError(f"significance undefined for {entity!r} at {i}")
        return bool(v >= self.theta)


@dataclass
class LabelSet:
    """Dense labels per (entity, period): 1 positive, 0 negative, -1 undefined."""

    entities: list[str]
    horizon: int
    labels: np.ndarray           # (C, T) int8

    @property
    def positives_fraction(self) -> float:
        defined = self.labels >= 0
        if not defined.any():
            return float("nan")
        return float((self.labels == 1).sum() / defined.sum())

    def label(self, entity: str, i: int) -> int:
        return int(self.labels[self.entities.index(entity), i])


def significance(
    norm: DailyNormalized,
    baseline: BaselineMean | None,
    theta: float = DEFAULT_THETA,
    source: str = "mainstream",
) -> SignificanceSeries:
    """Smoothed reporting level; relative to the entity's training mean when
    a baseline is given, absolute otherwise."""
    sameday = norm.sameday(source)
    if baseline is not None:
        if list(baseline.entities) != list(norm.entities):
            raise ValidationError("baseline entity order does not match normalized cube")
        if baseline.flagged.any():
            bad = [c for c, f in zip(baseline.entities, baseline.flagged) if f]
            raise ValidationError(f"flagged training means for: {', '.join(bad)}")
        ratio = sameday / baseline.mean[:, np.newaxis]
    else:
        ratio = sameday
    values = np.full(ratio.shape, np.nan)
    values[:, 1:-1] = (ratio[:, :-2] + ratio[:, 1:-1] + ratio[:, 2:]) / 3.0
    return SignificanceSeries(list(norm.entities), values, theta)


def label_days(sig: SignificanceSeries, horizon: int) -> LabelSet:
    """Whether the three-day window starting `horizon` days ahead is
    significant: label(c, i) tests the window i+horizon .. i+horizon+2."""
    if horizon < 1:
        raise ValidationError(f"horizon must be >= 1, got {horizon}")
    n_entities, n_periods = sig.values.shape
    labels = np.full((n_entities, n_periods), -1, dtype=np.int8)
    shift = horizon + 1
    if shift < n_periods:
        window_center = sig.values[:, shift:]
        defined = ~np.isnan(window_center)
        pos = defined & (window_center >= sig.theta)
        labels[:, : n_periods - shift][defined] = 0
        labels[:, : n_periods - shift][pos] = 1
    return LabelSet(list(sig.entities), horizon, labels)


@dataclass
class QuantileThreshold:
    theta: float
    fraction: float              # fraction of training values >= theta
    tie_warning: bool


def threshold_from_quantile(training_values: np.ndarray, q: float = WEEKLY_POSITIVE_FRACTION) -> QuantileThreshold:
    """Smallest training value marking at most (and at most maximally) a
    fraction q of training periods positive under inclusive >=.

    With heavy ties no candidate may reach a fraction <= q; the largest
    value is then returned with a tie warning and the achieved fraction.
    """
    values = np.asarray(training_values, dtype=float)
    values = values[~np.isnan(values)]
    if values.size == 0:
        raise ValidationError("no training values to derive a threshold from")
    n = values.size
    candidates = np.unique(values)
    counts_ge = n - np.searchsorted(np.sort(values), candidates, side="left")
    fractions = counts_ge / n
    ok = fractions <= q
    if ok.any():
        pick = int(np.argmax(ok))     # smallest candidate with fraction <= q
        return QuantileThreshold(float(candidates[pick]), float(fractions[pick]), False)
    return QuantileThreshold(float(candidates[-1]), float(fractions[-1]), True)


def label_weeks(
    weekly: WeeklyNormalized,
    event_type: str,
    source: str,
    theta: float,
    horizon: int = 1,
) -> LabelSet:
    """Whether the same-week series meets the threshold `horizon` weeks ahead."""
    if horizon < 1:
        raise ValidationError(f"horizon must be >= 1, got {horizon}")
    series = weekly.series(event_type, source, 0)
    n = series.shape[0]
    labels = np.full((1, n), -1, dtype=np.int8)
    if horizon < n:
        future = series[horizon:]
        defined = ~np.isnan(future)
        pos = defined & (future >= theta)
        labels[0, : n - horizon][defined] = 0
        labels[0, : n - horizon][pos] = 1
    return LabelSet([weekly.entity], horizon, labels)
