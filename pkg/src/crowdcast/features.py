"""Feature vectors for (entity, period, horizon) prediction instances.

Day-level tasks use, per instance: the cluster-membership indicator, the
ten most recent days of same-day reporting, the two most recent first
differences of those values, and cumulative partial sums of (a) the
violence rating and (b) the forward-looking mention sums over the next
three days from each publication day, for mainstream and twitter sources.
On the relative (country) scale every block is divided by the entity's
training mean; the city task skips that division and appends the
containing country's blocks.

Predicting the window starting `horizon` days ahead shifts every feature
index back by horizon-1 days, so the vector length never changes and no
future data leaks in.

Week-level tasks use, per (event type, source, lag), the same-week value
and the forward-looking value targeting the week under prediction.
"""

from __future__ import annotations

import datetime as dt
import hashlib
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .clustering import cluster_onehot
from .detrend import BaselineMean, DailyNormalized, WeeklyNormalized
from .errors import ValidationError
from .labeling import LabelSet

HISTORY_DAYS = 10
FORWARD_DAYS = 3
DIFF_COUNT = 2
DEFAULT_LAGS = 5

RECENT_FIRST = "recent_first"
OLDEST_FIRST = "oldest_first"

SCHEMA_VERSION = "1"


@dataclass(frozen=True)
class FeatureSchema:
    task: str
    blocks: tuple                       # ((name, length), ...)
    cumsum_order: str = RECENT_FIRST
    version: str = SCHEMA_VERSION

    @property
    def length(self) -> int:
        return sum(n for _, n in self.blocks)

    def names(self) -> list[str]:
        out = []
        for name, n in self.blocks:
            out.extend(f"{name}[{j}]" for j in range(n))
        return out

    def fingerprint(self) -> str:
        text = "|".join([self.task, self.version, self.cumsum_order]
                        + [f"{name}:{n}" for name, n in self.blocks])
        return hashlib.sha256(text.encode()).hexdigest()[:16]


def country_schema(n_clusters: int, cumsum_order: str = RECENT_FIRST) -> FeatureSchema:
    return FeatureSchema(
        task="country_day",
        blocks=(
            ("cluster", n_clusters),
            ("sameday", HISTORY_DAYS),
            ("sameday_diff", DIFF_COUNT),
            ("violence_cum", HISTORY_DAYS),
            ("fwd_mainstream_cum", HISTORY_DAYS),
            ("fwd_twitter_cum", HISTORY_DAYS),
        ),
        cumsum_order=cumsum_order,
    )


def city_schema(n_clusters: int, cumsum_order: str = RECENT_FIRST) -> FeatureSchema:
    city_blocks = (
        ("cluster", n_clusters),
        ("sameday", HISTORY_DAYS),
        ("sameday_diff", DIFF_COUNT),
        ("violence_cum", HISTORY_DAYS),
        ("fwd_mainstream_cum", HISTORY_DAYS),
        ("fwd_twitter_cum", HISTORY_DAYS),
    )
    country_blocks = tuple((f"country_{name}", n) for name, n in city_blocks[1:])
    return FeatureSchema(task="city_day", blocks=city_blocks + country_blocks,
                         cumsum_order=cumsum_order)


def weekly_schema(event_types: list[str], sources: list[str], lags: int = DEFAULT_LAGS) -> FeatureSchema:
    blocks = []
    for e in event_types:
        for s in sources:
            for lag in range(lags):
                blocks.append((f"wk.{e}.{s}.lag{lag}", 2))   # [same, fwd]
    return FeatureSchema(task="weekly_nb", blocks=tuple(blocks))


@dataclass
class InstanceSet:
    """Aligned instance rows: ids, period indexes, features, optional labels."""

    schema: FeatureSchema
    horizon: int
    entity_ids: list[str]
    period_index: np.ndarray
    X: np.ndarray
    y: np.ndarray | None = None        # int8 0/1 when labeled
    skipped: int = 0

    def __post_init__(self):
        if self.X.ndim != 2 or self.X.shape[1] != self.schema.length:
            raise ValidationError(
                f"feature matrix width {self.X.shape} does not match schema length {self.schema.length}")
        if not np.isfinite(self.X).all():
            raise ValidationError("non-finite feature values")

    def __len__(self) -> int:
        return self.X.shape[0]

    def rows_in_periods(self, periods: Iterable[int]) -> "InstanceSet":
        wanted = set(periods)
        mask = np.array([p in wanted for p in self.period_index], dtype=bool)
        return self.select(mask)

    def select(self, mask: np.ndarray) -> "InstanceSet":
        return InstanceSet(
            schema=self.schema,
            horizon=self.horizon,
            entity_ids=[e for e, m in zip(self.entity_ids, mask) if m],
            period_index=self.period_index[mask],
            X=self.X[mask],
            y=None if self.y is None else self.y[mask],
            skipped=self.skipped,
        )


def _recent_first_windows(series: np.ndarray, width: int) -> np.ndarray:
    """Row i holds [x(i), x(i-1), ..., x(i-width+1)]; NaN while i < width-1."""
    n = series.shape[0]
    out = np.full((n, width), np.nan)
    if n >= width:
        out[width - 1:] = sliding_window_view(series, width)[:, ::-1]
    return out


def _cumulative(block: np.ndarray, order: str) -> np.ndarray:
    """Cumulative partial sums of a recent-first window block."""
    if order == RECENT_FIRST:
        return np.cumsum(block, axis=-1)
    if order == OLDEST_FIRST:
        return np.cumsum(block[..., ::-1], axis=-1)
    raise ValidationError(f"unknown cumsum order {order!r}")


def _day_blocks(
    norm: DailyNormalized,
    row: int,
    scale: float,
    cumsum_order: str,
) -> np.ndarray:
    """The five shared day-level blocks for one entity, all anchor days.

    Returns a (T, 42) matrix whose row j is the feature block evaluated
    with anchor day j (horizon shift is applied by the caller through the
    anchor index). NaN rows mark warm-up violations.
    """
    sameday = norm.sameday("mainstream")[row] / scale
    violence = norm.violence["mainstream"][row] / scale
    fwd = {}
    for s in ("mainstream", "twitter"):
        total = np.zeros_like(sameday)
        for k in range(1, FORWARD_DAYS + 1):
            total = total + norm.values[(s, k)][row]
        fwd[s] = total / scale

    win_r = _recent_first_windows(sameday, HISTORY_DAYS)
    diffs = np.stack([win_r[:, 0] - win_r[:, 1], win_r[:, 1] - win_r[:, 2]], axis=1)
    win_v = _cumulative(_recent_first_windows(violence, HISTORY_DAYS), cumsum_order)
    win_fm = _cumulative(_recent_first_windows(fwd["mainstream"], HISTORY_DAYS), cumsum_order)
    win_ft = _cumulative(_recent_first_windows(fwd["twitter"], HISTORY_DAYS), cumsum_order)
    return np.concatenate([win_r, diffs, win_v, win_fm, win_ft], axis=1)


def _assemble_day_task(
    schema: FeatureSchema,
    onehots: np.ndarray,
    block_rows: list[np.ndarray],
    entities: list[str],
    periods: Iterable[int],
    horizon: int,
    labels: LabelSet | None,
) -> InstanceSet:
    shift = horizon - 1
    rows_X, rows_ent, rows_i, rows_y = [], [], [], []
    skipped = 0
    for i in sorted(periods):
        for row, entity in enumerate(entities):
            anchor = i - shift
            if anchor < 0:
                skipped += 1
                continue
            feats = np.concatenate([onehots[row]] + [b[anchor] for b in block_rows[row]])
            if np.isnan(feats).any():
                skipped += 1
                continue
            if labels is not None:
                lab = labels.labels[row, i]
                if lab < 0:
                    skipped += 1
                    continue
                rows_y.append(lab)
            rows_X.append(feats)
            rows_ent.append(entity)
            rows_i.append(i)
    X = np.array(rows_X) if rows_X else np.zeros((0, schema.length))
    y = np.array(rows_y, dtype=np.int8) if labels is not None else None
    return InstanceSet(schema, horizon, rows_ent, np.array(rows_i, dtype=np.int64), X, y, skipped)


def build_country_instances(
    norm: DailyNormalized,
    baseline: BaselineMean,
    cluster_labels: np.ndarray,
    n_clusters: int,
    horizon: int,
    periods: Iterable[int],
    labels: LabelSet | None = None,
    cumsum_order: str = RECENT_FIRST,
) -> InstanceSet:
    """Relative-scale instances for the country panel."""
    if horizon < 1:
        raise ValidationError("horizon must be >= 1")
    schema = country_schema(n_clusters, cumsum_order)
    onehots = cluster_onehot(cluster_labels, n_clusters)
    block_rows = []
    for row, entity in enumerate(norm.entities):
        mean = baseline.require(entity)
        block_rows.append([_day_blocks(norm, row, mean, cumsum_order)])
    return _assemble_day_task(schema, onehots, block_rows, norm.entities, periods, horizon, labels)


def build_city_instances(
    city_norm: DailyNormalized,
    country_norm: DailyNormalized,
    parents: dict,
    cluster_labels: np.ndarray,
    n_clusters: int,
    horizon: int,
    periods: Iterable[int],
    labels: LabelSet | None = None,
    cumsum_order: str = RECENT_FIRST,
) -> InstanceSet:
    """Absolute-scale city instances with the containing country appended."""
    if horizon < 1:
        raise ValidationError("horizon must be >= 1")
    schema = city_schema(n_clusters, cumsum_order)
    onehots = cluster_onehot(cluster_labels, n_clusters)
    block_rows = []
    for row, city in enumerate(city_norm.entities):
        parent = parents.get(city)
        if not parent:
            raise ValidationError(f"city {city!r} has no containing country configured")
        country_row = country_norm.row(parent)
        block_rows.append([
            _day_blocks(city_norm, row, 1.0, cumsum_order),
            _day_blocks(country_norm, country_row, 1.0, cumsum_order),
        ])
    return _assemble_day_task(schema, onehots, block_rows, city_norm.entities, periods, horizon, labels)


def build_weekly_instances(
    weekly: WeeklyNormalized,
    horizon: int,
    periods: Iterable[int],
    labels: LabelSet | None = None,
    lags: int = DEFAULT_LAGS,
) -> InstanceSet:
    """Lagged same-week and forward-looking values for one entity."""
    if horizon < 1:
        raise ValidationError("horizon must be >= 1")
    schema = weekly_schema(weekly.event_types, weekly.sources, lags)
    needed = horizon + lags - 1
    if weekly.values.shape[-1] <= needed:
        raise ValidationError(
            f"weekly cube holds offsets up to {weekly.values.shape[-1] - 1}, "
            f"need {needed} for horizon {horizon} with {lags} lags")
    rows_X, rows_ent, rows_i, rows_y = [], [], [], []
    skipped = 0
    for i in sorted(periods):
        if i - (lags - 1) < 0:
            skipped += 1
            continue
        feats = np.empty(schema.length)
        pos = 0
        for e in range(len(weekly.event_types)):
            for s in range(len(weekly.sources)):
                for lag in range(lags):
                    feats[pos] = weekly.values[e, s, i - lag, 0]
                    feats[pos + 1] = weekly.values[e, s, i - lag, horizon + lag]
                    pos += 2
        if np.isnan(feats).any():
            skipped += 1
            continue
        if labels is not None:
            lab = labels.labels[0, i]
            if lab < 0:
                skipped += 1
                continue
            rows_y.append(lab)
        rows_X.append(feats)
        rows_ent.append(weekly.entity)
        rows_i.append(i)
    X = np.array(rows_X) if rows_X else np.zeros((0, schema.length))
    y = np.array(rows_y, dtype=np.int8) if labels is not None else None
    return InstanceSet(schema, horizon, rows_ent, np.array(rows_i, dtype=np.int64), X, y, skipped)


# -- delimited export/import (bit-identical round trips) -------------------


def dump_instances(inst: InstanceSet, calendar, out) -> None:
    names = inst.schema.names()
    out.write(f"# crowdcast-instances/1 task={inst.schema.task} version={inst.schema.version} "
              f"cumsum={inst.schema.cumsum_order} horizon={inst.horizon} "
              f"fingerprint={inst.schema.fingerprint()} skipped={inst.skipped}\n")
    out.write("# blocks " + ",".join(f"{n}:{w}" for n, w in inst.schema.blocks) + "\n")
    out.write("\t".join(["entity", "date", "horizon", "label"] + names) + "\n")
    for r in range(len(inst)):
        label = "" if inst.y is None else str(int(inst.y[r]))
        date = calendar.date(int(inst.period_index[r])).isoformat()
        feats = "\t".join(repr(float(v)) for v in inst.X[r])
        out.write(f"{inst.entity_ids[r]}\t{date}\t{inst.horizon}\t{label}\t{feats}\n")


def load_instances(lines: Iterable[str], calendar) -> InstanceSet:
    header = None
    meta = {}
    blocks = None
    ents, idxs, ys, xs = [], [], [], []
    horizon = None
    for line in lines:
        line = line.rstrip("\n")
        if not line:
            continue
        if line.startswith("# crowdcast-instances/1"):
            meta = dict(part.split("=", 1) for part in line.split()[2:])
            continue
        if line.startswith("# blocks "):
            blocks = tuple((p.rsplit(":", 1)[0], int(p.rsplit(":", 1)[1]))
                           for p in line[len("# blocks "):].split(","))
            continue
        if header is None:
            header = line.split("\t")
            continue
        fields = line.split("\t")
        ents.append(fields[0])
        idxs.append(calendar.index(dt.date.fromisoformat(fields[1])))
        horizon = int(fields[2])
        ys.append(None if fields[3] == "" else int(fields[3]))
        xs.append([float(v) for v in fields[4:]])
    if blocks is None or header is None or horizon is None:
        raise ValidationError("instance file missing header lines")
    schema = FeatureSchema(task=meta.get("task", "?"), blocks=blocks,
                           cumsum_order=meta.get("cumsum", RECENT_FIRST),
                           version=meta.get("version", SCHEMA_VERSION))
    labeled = all(v is not None for v in ys) and len(ys) > 0
    return InstanceSet(
        schema=schema,
        horizon=horizon,
        entity_ids=ents,
        period_index=np.array(idxs, dtype=np.int64),
        X=np.array(xs) if xs else np.zeros((0, schema.length)),
        y=np.array(ys, dtype=np.int8) if labeled else None,
        skipped=int(meta.get("skipped", 0)),
    )
