"""Trailing-window normalization that removes source-bank growth trends.

Raw mention counts drift upward as sources are added over time. Dividing
each count by the average volume over a trailing window (90 days, or 12
weeks for weekly cubes) makes series comparable across time:

  daily   value(c,s,i,k) = M(c,s,i,k) / mean over all entities and the 90
          trailing days of M(.,s,.,k)          -- denominator shared
          across entities, specific to (s,k)
  weekly  value(e,s,i,k) = M(e,s,i,k) / total mention volume of the entity
          from source s over the 12 trailing weeks, pooled over event
          types and target offsets             -- per-entity denominator

Values are undefined (NaN) during the warm-up span where the trailing
window would leave the corpus. A zero denominator yields value 0 plus a
flag, so "no recent volume" cases stay auditable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .calendar import Calendar
from .cube import CountCube
from .errors import ValidationError

DAILY_WINDOW = 90
WEEKLY_WINDOW = 12

POOLED_TOTAL = "pooled_total"   # trailing volume summed over all offsets
PER_OFFSET = "per_offset"       # trailing volume at the value's own offset


def _trailing_sums(series: np.ndarray, window: int) -> np.ndarray:
    """trailing[i] = sum of series[i-window .. i-1]; NaN where undefined."""
    n = series.shape[-1]
    csum = np.concatenate([np.zeros(series.shape[:-1] + (1,)), np.cumsum(series, axis=-1)], axis=-1)
    out = np.full(series.shape, np.nan)
    if n >= window:
        out[..., window:] = csum[..., window:n] - csum[..., : n - window]
    return out


def _ratio(numerator: np.ndarray, denominator: np.ndarray):
    """numerator/denominator with NaN where undefined, 0+flag where denom==0."""
    values = np.full(numerator.shape, np.nan)
    flags = np.zeros(numerator.shape, dtype=bool)
    defined = ~np.isnan(denominator)
    zero = defined & (denominator == 0.0)
    ok = defined & ~zero
    values[ok] = numerator[ok] / denominator[ok]
    values[zero] = 0.0
    flags[zero] = True
    return values, flags


@dataclass
class DailyNormalized:
    """De-trended dense series for a fixed event type over one entity list."""

    calendar: Calendar
    entities: list[str]
    event_type: str
    window: int
    values: dict = field(default_factory=dict)     # (source, offset) -> (C, T) array
    violence: dict = field(default_factory=dict)   # source -> (C, T) array
    flags: dict = field(default_factory=dict)      # same keys -> bool arrays
    warmup_end: int = 0

    def row(self, entity: str) -> int:
        try:
            return self.entities.index(entity)
        except ValueError:
            raise ValidationError(f"entity {entity!r} not in normalized cube") from None

    def value(self, entity: str, source: str, i: int, k: int) -> float:
        return float(self.values[(source, k)][self.row(entity), i])

    def sameday(self, source: str = "mainstream") -> np.ndarray:
        return self.values[(source, 0)]


def normalize_daily(
    cube: CountCube,
    entities: list[str],
    event_type: str,
    sources: list[str],
    offsets: list[int],
    window: int = DAILY_WINDOW,
) -> DailyNormalized:
    """De-trend day-level counts and violence for the given entity panel."""
    if cube.granularity != "day":
        raise ValidationError("normalize_daily expects a day cube")
    if not entities:
        raise ValidationError("empty entity list")
    out = DailyNormalized(cube.calendar, list(entities), event_type, window, warmup_end=window)
    for s in sources:
        for k in offsets:
            raw = cube.count_matrix(out.entities, event_type, s, k)
            denom = _trailing_sums(raw.sum(axis=0), window) / (len(entities) * window)
            values, flags = _ratio(raw, denom[np.newaxis, :])
            out.values[(s, k)] = values
            out.flags[(s, k)] = flags
        vraw = cube.violence_matrix(out.entities, event_type, s)
        vdenom = _trailing_sums(vraw.sum(axis=0), window) / (len(entities) * window)
        vvalues, vflags = _ratio(vraw, vdenom[np.newaxis, :])
        out.violence[s] = vvalues
        out.flags[("violence", s)] = vflags
    return out


@dataclass
class WeeklyNormalized:
    """De-trended weekly series for one entity across all its event types."""

    calendar: Calendar
    entity: str
    event_types: list[str]
    sources: list[str]
    window: int
    denominator: str
    values: np.ndarray = None          # (E, S, T, K) with offsets 0..K-1
    flags: np.ndarray = None           # broadcastable flag array
    warmup_end: int = 0

    def value(self, event_type: str, source: str, i: int, k: int) -> float:
        e = self.event_types.index(event_type)
        s = self.sources.index(source)
        return float(self.values[e, s, i, k])

    def series(self, event_type: str, source: str, offset: int) -> np.ndarray:
        e = self.event_types.index(event_type)
        s = self.sources.index(source)
        return self.values[e, s, :, offset]


def normalize_weekly(
    cube: CountCube,
    entity: str,
    event_types: list[str],
    sources: list[str],
    max_offset: int,
    window: int = WEEKLY_WINDOW,
    denominator: str = POOLED_TOTAL,
) -> WeeklyNormalized:
    """De-trend week-level counts for one entity.

    The denominator is this entity's trailing total volume from the source,
    pooled over event types. `denominator` picks whether the trailing
    volume also pools target offsets (default) or is taken at each value's
    own offset.
    """
    if cube.granularity != "week":
        raise ValidationError("normalize_weekly expects a week cube")
    if denominator not in (POOLED_TOTAL, PER_OFFSET):
        raise ValidationError(f"unknown denominator strategy {denominator!r}")
    n_periods = cube.calendar.n_periods
    offsets = list(range(max_offset + 1))
    raw = np.zeros((len(event_types), len(sources), n_periods, len(offsets)))
    totals = np.zeros((len(sources), n_periods))
    e_index = {e: i for i, e in enumerate(event_types)}
    s_index = {s: i for i, s in enumerate(sources)}
    for (c, e, s, i, k), n in cube.counts.items():
        if c != entity or e not in e_index or s not in s_index:
            continue
        totals[s_index[s], i] += n
        if 0 <= k <= max_offset:
            raw[e_index[e], s_index[s], i, k] = n
    out = WeeklyNormalized(
        cube.calendar, entity, list(event_types), list(sources), window, denominator,
        warmup_end=window,
    )
    if denominator == POOLED_TOTAL:
        denom = _trailing_sums(totals, window)          # (S, T)
        values, flags = _ratio(raw, denom[np.newaxis, :, :, np.newaxis])
    else:
        per_offset = raw.sum(axis=0)                    # (S, T, K)
        denom = _trailing_sums(np.moveaxis(per_offset, -1, 0), window)  # (K, S, T)
        denom = np.moveaxis(denom, 0, -1)               # (S, T, K)
        values, flags = _ratio(raw, denom[np.newaxis])
    out.values = values
    out.flags = flags
    return out


@dataclass
class BaselineMean:
    """Per-entity training average of same-day mainstream reporting."""

    entities: list[str]
    mean: np.ndarray
    flagged: np.ndarray            # True where the mean is unusable as a divisor

    def require(self, entity: str) -> float:
        row = self.entities.index(entity)
        if self.flagged[row]:
            raise ValidationError(f"entity {entity!r} has a flagged (zero/undefined) training mean")
        return float(self.mean[row])


def training_mean(norm: DailyNormalized, calendar: Calendar, source: str = "mainstream") -> BaselineMean:
    """Average same-day reporting per entity over defined training days."""
    sameday = norm.sameday(source)
    lo = norm.warmup_end
    hi = calendar.train_end_index + 1
    if hi <= lo:
        raise ValidationError("training range ends before warm-up completes")
    window = sameday[:, lo:hi]
    defined = ~np.isnan(window)
    if not defined.any(axis=1).all():
        raise ValidationError("an entity has no defined training days")
    mean = np.nanmean(window, axis=1)
    flagged = ~(mean > 0.0)
    return BaselineMean(list(norm.entities), mean, flagged)
