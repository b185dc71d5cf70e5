"""Planted-signal synthetic mention corpora for desk-scale benchmarks.

Counts are independent Poisson draws whose intensity combines a per-series
base rate, a geometric source-bank growth factor, and episode multipliers.
An episode at day D plants the phenomenology the real pipeline is meant to
exploit: forward-looking twitter mentions targeting D appear over the lead
days D-L..D-1, violence ratings ramp up toward D, and same-day mainstream
reporting spikes on D..D+2. Everything is deterministic given the seed
(per-entity substreams; the record stream is canonically sorted).
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass

import numpy as np

from .calendar import Calendar
from .errors import ValidationError
from .records import MentionRecord

PROTEST = "protest"


@dataclass
class EntitySpec:
    entity_id: str
    kind: str = "country"
    parent: str | None = None


@dataclass
class SynthConfig:
    entities: list
    calendar: Calendar
    seed: int = 0
    event_type: str = PROTEST
    # base expected mentions per day, per (source, target offset)
    base_mainstream_sameday: float = 10.0
    base_mainstream_forward: float = 0.6
    base_twitter_sameday: float = 3.0
    base_twitter_forward: float = 1.5
    max_forward_offset: int = 3
    # trend: intensities multiply by growth_per_30 every 30 days
    growth_per_30: float = 1.0
    # episodes
    episode_rate_per_year: float = 7.0
    episode_amplitude: float = 8.0         # mainstream same-day multiplier on D..D+2
    lead_time: int = 4                     # precursor chatter days before D
    precursor_amplitude: float = 6.0       # twitter forward multiplier during lead
    violence_base: float = 0.05            # per-mention violence score baseline
    violence_ramp: float = 0.5             # added at D, ramping linearly over the lead
    def __post_init__(self):
        if self.growth_per_30 < 1.0:
            raise ValidationError("growth_per_30 must be >= 1")
        if self.lead_time < 0 or self.episode_rate_per_year < 0:
            raise ValidationError("rates and lead time must be nonnegative")
        if self.episode_amplitude < 1.0 or self.precursor_amplitude < 1.0:
            raise ValidationError("episode multipliers must be >= 1")


def _entity_stream(cfg: SynthConfig, spec: EntitySpec, entity_index: int) -> list[MentionRecord]:
    cal = cfg.calendar
    n_days = cal.n_periods
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, entity_index]))
    growth = cfg.growth_per_30 ** (np.arange(n_days) / 30.0)

    years = n_days / 365.0
    n_episodes = rng.poisson(cfg.episode_rate_per_year * years)
    episode_days = np.sort(rng.choice(n_days, size=min(n_episodes, n_days), replace=False)) \
        if n_episodes else np.empty(0, dtype=int)

    spike = np.ones(n_days)                   # mainstream same-day multiplier
    precursor = np.zeros(n_days, dtype=int)   # days-to-episode (0 = none)
    violence_boost = np.zeros(n_days)         # added per-mention score
    for D in episode_days:
        for d in range(D, min(D + 3, n_days)):
            spike[d] = max(spike[d], cfg.episode_amplitude)
        for back in range(1, cfg.lead_time + 1):
            j = D - back
            if j >= 0:
                precursor[j] = D - j if precursor[j] == 0 else min(precursor[j], D - j)
        for back in range(0, cfg.lead_time + 1):
            j = D - back
            if j >= 0:
                ramp = cfg.violence_ramp * (1.0 - back / (cfg.lead_time + 1))
                violence_boost[j] = max(violence_boost[j], ramp)

    records: list[MentionRecord] = []

    def emit(source: str, day: int, offset: int, lam: float, violent: float) -> None:
        count = rng.poisson(lam)
        if count == 0:
            return
        target = day + offset
        if target < 0 or target >= n_days:
            return
        publish_date = cal.date(day)
        target_date = cal.date(target)
        scores = np.clip(rng.normal(violent, 0.02, size=count), 0.0, 1.0)
        for s in scores:
            records.append(MentionRecord(
                entity_id=spec.entity_id,
                entity_kind=spec.kind,
                parent_entity=spec.parent,
                event_type=cfg.event_type,
                source_type=source,
                publish_day=publish_date,
                target_day=target_date,
                violence_score=float(round(s, 6)),
            ))

    for day in range(n_days):
        g = growth[day]
        emit("mainstream", day, 0, cfg.base_mainstream_sameday * g * spike[day],
             cfg.violence_base + violence_boost[day])
        for offset in range(1, cfg.max_forward_offset + 1):
            emit("mainstream", day, offset, cfg.base_mainstream_forward * g,
                 cfg.violence_base)
        emit("twitter", day, 0, cfg.base_twitter_sameday * g, cfg.violence_base)
        for offset in range(1, cfg.max_forward_offset + 1):
            lam = cfg.base_twitter_forward * g
            if precursor[day] == offset:
                lam *= cfg.precursor_amplitude
            emit("twitter", day, offset, lam, cfg.violence_base + violence_boost[day] * 0.5)
    return records


def generate(cfg: SynthConfig) -> list[MentionRecord]:
    """Full record stream, canonically sorted; byte-identical per seed."""
    if not cfg.entities:
        raise ValidationError("no entities configured")
    records: list[MentionRecord] = []
    for i, spec in enumerate(cfg.entities):
        records.extend(_entity_stream(cfg, spec, i))
    records.sort(key=lambda r: (r.publish_day, r.entity_id, r.source_type,
                                r.target_day, r.violence_score))
    return records


def benchmark_config(seed: int = 1234) -> SynthConfig:
    """The documented planted-signal benchmark: 18 entities, 2.5 years,
    lead time 4, tuned to label roughly 6% of three-day stretches positive
    at the default significance threshold."""
    entities = [EntitySpec(f"entity{i:02d}") for i in range(18)]
    calendar = Calendar(
        corpus_start=dt.date(2011, 1, 1),
        corpus_end=dt.date(2013, 6, 30),
        train_end=dt.date(2012, 12, 31),
        test_start=dt.date(2013, 1, 1),
    )
    return SynthConfig(
        entities=entities,
        calendar=calendar,
        seed=seed,
        growth_per_30=1.02,
        episode_rate_per_year=7.0,
        episode_amplitude=8.0,
        lead_time=4,
        precursor_amplitude=6.0,
    )


def detrend_check_config(seed: int = 77) -> SynthConfig:
    """Geometric growth, no episodes: input for the de-trending property."""
    cfg = benchmark_config(seed)
    cfg.growth_per_30 = 1.05
    cfg.episode_rate_per_year = 0.0
    return cfg


@dataclass
class WeeklySynthConfig:
    """Multi-event corpus for one entity, driving the weekly sequence task.

    Campaign weeks spike the target event type across sources; in the weeks
    leading up, social-media chatter rises and forward-looking mentions of
    the campaign week appear.
    """

    entity: str
    calendar: Calendar
    event_types: list
    target_event: str
    seed: int = 0
    sources: tuple = ("mainstream", "social_media", "blog")
    base_rate_per_week: float = 6.0          # per (event, source), same-week
    base_forward_per_week: float = 1.0       # per (event, source), per forward week
    max_forward_weeks: int = 3
    campaign_rate_per_year: float = 8.0
    campaign_amplitude: float = 7.0
    lead_weeks: int = 2
    chatter_amplitude: float = 4.0           # social chatter multiplier during lead

    def __post_init__(self):
        if self.target_event not in self.event_types:
            raise ValidationError("target_event must be one of event_types")


def generate_weekly(cfg: WeeklySynthConfig) -> list[MentionRecord]:
    """Day-level records (aggregate with cube.aggregate_weekly downstream)."""
    cal = cfg.calendar
    n_days = cal.n_periods
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 991]))
    wcal = cal.weekly()
    n_weeks = wcal.n_periods

    years = n_days / 365.0
    n_campaigns = rng.poisson(cfg.campaign_rate_per_year * years)
    campaign_weeks = np.sort(rng.choice(np.arange(4, n_weeks - 1), size=min(n_campaigns, n_weeks - 5),
                                        replace=False)) if n_campaigns else np.empty(0, dtype=int)
    campaign_set = set(int(w) for w in campaign_weeks)

    records: list[MentionRecord] = []

    def emit(event: str, source: str, day: int, target_day: int, lam: float) -> None:
        count = rng.poisson(lam)
        if count == 0 or not (0 <= target_day < n_days):
            return
        for _ in range(count):
            records.append(MentionRecord(
                entity_id=cfg.entity,
                entity_kind="country",
                event_type=event,
                source_type=source,
                publish_day=cal.date(day),
                target_day=cal.date(target_day),
                violence_score=0.0,
            ))

    daily_base = cfg.base_rate_per_week / 7.0
    daily_fwd = cfg.base_forward_per_week / 7.0
    for day in range(n_days):
        week = wcal.index_unchecked(cal.date(day))
        lead_hit = any((week + ahead) in campaign_set for ahead in range(1, cfg.lead_weeks + 1))
        for event in cfg.event_types:
            is_target = event == cfg.target_event
            for source in cfg.sources:
                lam = daily_base
                if is_target and week in campaign_set:
                    lam *= cfg.campaign_amplitude
                if source == "social_media" and lead_hit and event in (cfg.target_event, "protest"):
                    lam *= cfg.chatter_amplitude
                emit(event, source, day, day, lam)
                for ahead in range(1, cfg.max_forward_weeks + 1):
                    target_week = week + ahead
                    flam = daily_fwd
                    if is_target and source in ("social_media", "blog") and target_week in campaign_set:
                        flam *= cfg.campaign_amplitude
                    emit(event, source, day, day + 7 * ahead, flam)
    records.sort(key=lambda r: (r.publish_day, r.event_type, r.source_type, r.target_day))
    return records


def weekly_benchmark_config(seed: int = 555) -> WeeklySynthConfig:
    calendar = Calendar(
        corpus_start=dt.date(2011, 1, 3),
        corpus_end=dt.date(2013, 6, 30),
        train_end=dt.date(2012, 12, 30),
        test_start=dt.date(2012, 12, 31),
    )
    return WeeklySynthConfig(
        entity="istria",
        calendar=calendar,
        event_types=["cyber_attack", "protest", "statement", "military_action",
                     "acquisition", "election"],
        target_event="cyber_attack",
        seed=seed,
    )
