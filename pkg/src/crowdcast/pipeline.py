"""Task assembly: from a count cube to ready-to-train instance sets.

Three tasks are wired here:

  country_day  relative significance per country, 50-feature vectors
  city_day     absolute significance per city, country blocks appended
  weekly_nb    one entity's weekly multi-event sequence task

Training instances only use periods whose label window closes inside the
training range; test instances start at the test split. Feature windows
that touch the normalization warm-up are skipped by the builders.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .calendar import Calendar
from .clustering import WardClusterer, default_cluster_count, ks_distance_matrix
from .cube import CountCube, pool_sources
from .detrend import (DAILY_WINDOW, POOLED_TOTAL, WEEKLY_WINDOW, BaselineMean,
                      DailyNormalized, WeeklyNormalized, normalize_daily,
                      normalize_weekly, training_mean)
from .errors import ValidationError
from .features import (DEFAULT_LAGS, RECENT_FIRST, FORWARD_DAYS, InstanceSet,
                       build_city_instances, build_country_instances,
                       build_weekly_instances)
from .labeling import (DEFAULT_THETA, LabelSet, SignificanceSeries,
                       label_days, label_weeks, significance,
                       threshold_from_quantile)

TRAIN = "train"
TEST = "test"


def _training_samples(sig: SignificanceSeries, calendar: Calendar) -> list:
    """Per-entity defined training significance values, time ignored."""
    hi = calendar.train_end_index + 1
    samples = []
    for row in range(len(sig.entities)):
        vals = sig.values[row, :hi]
        samples.append(vals[~np.isnan(vals)])
    return samples


@dataclass
class DayTaskConfig:
    entities: list
    event_type: str = "protest"
    sources: tuple = ("mainstream", "twitter")
    theta: float | None = DEFAULT_THETA
    quantile: float | None = None        # used when theta is None
    window: int = DAILY_WINDOW
    n_clusters: int | None = None
    ward_variant: str = "d2"
    cumsum_order: str = RECENT_FIRST
    parents: dict = field(default_factory=dict)      # city -> country (city task)
    country_entities: list = field(default_factory=list)


@dataclass
class CountryTask:
    calendar: Calendar
    config: DayTaskConfig
    norm: DailyNormalized
    baseline: BaselineMean
    sig: SignificanceSeries
    cluster_labels: np.ndarray
    n_clusters: int

    def labels(self, horizon: int) -> LabelSet:
        return label_days(self.sig, horizon)

    def instances(self, horizon: int, split: str) -> InstanceSet:
        labels = self.labels(horizon)
        periods = _split_periods(self.calendar, horizon, split)
        return build_country_instances(
            self.norm, self.baseline, self.cluster_labels, self.n_clusters,
            horizon, periods, labels, self.config.cumsum_order)


def _split_periods(calendar: Calendar, horizon: int, split: str) -> range:
    if split == TRAIN:
        return range(0, calendar.train_end_index - (horizon + 2) + 1)
    if split == TEST:
        return calendar.test_indices()
    raise ValidationError(f"unknown split {split!r}")


def prepare_country_task(cube: CountCube, config: DayTaskConfig) -> CountryTask:
    calendar = cube.calendar
    offsets = list(range(FORWARD_DAYS + 1))
    norm = normalize_daily(cube, config.entities, config.event_type,
                           list(config.sources), offsets, config.window)
    baseline = training_mean(norm, calendar)
    theta = config.theta if config.theta is not None else DEFAULT_THETA
    sig = significance(norm, baseline, theta)
    samples = _training_samples(sig, calendar)
    n_clusters = config.n_clusters or default_cluster_count(len(config.entities))
    labels = WardClusterer(n_clusters=n_clusters, variant=config.ward_variant) \
        .fit_predict(ks_distance_matrix(samples))
    return CountryTask(calendar, config, norm, baseline, sig, labels, n_clusters)


@dataclass
class CityTask:
    calendar: Calendar
    config: DayTaskConfig
    city_norm: DailyNormalized
    country_norm: DailyNormalized
    sig: SignificanceSeries
    cluster_labels: np.ndarray
    n_clusters: int
    theta: float

    def labels(self, horizon: int) -> LabelSet:
        return label_days(self.sig, horizon)

    def instances(self, horizon: int, split: str) -> InstanceSet:
        labels = self.labels(horizon)
        periods = _split_periods(self.calendar, horizon, split)
        return build_city_instances(
            self.city_norm, self.country_norm, self.config.parents,
            self.cluster_labels, self.n_clusters, horizon, periods, labels,
            self.config.cumsum_order)


def prepare_city_task(cube: CountCube, config: DayTaskConfig) -> CityTask:
    """Absolute-scale city task; cube must also hold the parent countries."""
    if not config.parents:
        raise ValidationError("city task needs a city -> country parent map")
    countries = config.country_entities or sorted(set(config.parents.values()))
    calendar = cube.calendar
    offsets = list(range(FORWARD_DAYS + 1))
    city_norm = normalize_daily(cube, config.entities, config.event_type,
                                list(config.sources), offsets, config.window)
    country_norm = normalize_daily(cube, countries, config.event_type,
                                   list(config.sources), offsets, config.window)
    # absolute significance scale: no per-entity baseline division
    if config.theta is not None:
        theta = config.theta
        sig = significance(city_norm, None, theta)
    else:
        q = config.quantile if config.quantile is not None else 0.06
        provisional = significance(city_norm, None, np.inf)
        pooled = np.concatenate(_training_samples(provisional, calendar))
        theta = threshold_from_quantile(pooled, q).theta
        sig = significance(city_norm, None, theta)
    # cities cluster on their training same-day reporting levels
    hi = calendar.train_end_index + 1
    samples = []
    for row in range(len(config.entities)):
        vals = city_norm.sameday("mainstream")[row, :hi]
        samples.append(vals[~np.isnan(vals)])
    n_clusters = config.n_clusters or default_cluster_count(len(config.entities))
    labels = WardClusterer(n_clusters=n_clusters, variant=config.ward_variant) \
        .fit_predict(ks_distance_matrix(samples))
    return CityTask(calendar, config, city_norm, country_norm, sig, labels,
                    n_clusters, theta)


@dataclass
class WeeklyTaskConfig:
    entity: str
    event_types: list
    sources: tuple = ("any", "mainstream", "social_media", "blog")
    target_event: str = "cyber_attack"
    target_source: str = "any"
    lags: int = DEFAULT_LAGS
    quantile: float = 0.15
    window: int = WEEKLY_WINDOW
    denominator: str = POOLED_TOTAL
    max_horizon: int = 1
    pool_any: bool = True      # derive the "any" series from concrete sources


@dataclass
class WeeklyTask:
    calendar: Calendar
    config: WeeklyTaskConfig
    norm: WeeklyNormalized
    theta: float
    theta_fraction: float
    theta_tie_warning: bool

    def labels(self, horizon: int) -> LabelSet:
        return label_weeks(self.norm, self.config.target_event,
                           self.config.target_source, self.theta, horizon)

    def instances(self, horizon: int, split: str) -> InstanceSet:
        labels = self.labels(horizon)
        calendar = self.calendar
        if split == TRAIN:
            periods = range(0, calendar.train_end_index - horizon + 1)
        elif split == TEST:
            periods = calendar.test_indices()
        else:
            raise ValidationError(f"unknown split {split!r}")
        return build_weekly_instances(self.norm, horizon, periods, labels,
                                      self.config.lags)


def prepare_weekly_task(cube: CountCube, config: WeeklyTaskConfig) -> WeeklyTask:
    if cube.granularity != "week":
        raise ValidationError("weekly task expects a week-granularity cube")
    if config.target_event not in config.event_types:
        raise ValidationError("target_event must be listed in event_types")
    if config.pool_any and "any" in config.sources:
        cube = pool_sources(cube, "any", [s for s in cube.source_types() if s != "any"])
    max_offset = config.max_horizon + config.lags - 1
    norm = normalize_weekly(cube, config.entity, list(config.event_types),
                            list(config.sources), max_offset, config.window,
                            config.denominator)
    series = norm.series(config.target_event, config.target_source, 0)
    training = series[norm.warmup_end: cube.calendar.train_end_index + 1]
    training = training[~np.isnan(training)]
    pick = threshold_from_quantile(training, config.quantile)
    return WeeklyTask(cube.calendar, config, norm, pick.theta, pick.fraction,
                      pick.tie_warning)
