"""Count cubes: sparse mention tallies keyed on calendar periods.

The cube stores two sparse maps:

  counts[(entity, event_type, source_type, publish_index, target_offset)]
      -> number of mentions, where target_offset = target_index - publish_index
  violence[(entity, event_type, source_type, publish_index)]
      -> summed violence score of those mentions (all offsets pooled)

Absent keys mean zero. Cubes are immutable once built; merging shard cubes
is plain addition, so ingestion order never matters.
"""

from __future__ import annotations

import datetime as dt
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .calendar import Calendar, parse_date
from .errors import ValidationError
from .records import ANY_SOURCE, MentionRecord, read_records

CUBE_FORMAT = "crowdcast-cube/1"


@dataclass
class CountCube:
    calendar: Calendar
    counts: dict = field(default_factory=dict)
    violence: dict = field(default_factory=dict)

    @property
    def granularity(self) -> str:
        return self.calendar.granularity

    def total_count(self) -> int:
        return sum(self.counts.values())

    def entities(self) -> list[str]:
        seen = {key[0] for key in self.counts} | {key[0] for key in self.violence}
        return sorted(seen)

    def event_types(self) -> list[str]:
        return sorted({key[1] for key in self.counts} | {key[1] for key in self.violence})

    def source_types(self) -> list[str]:
        return sorted({key[2] for key in self.counts} | {key[2] for key in self.violence})

    # -- dense views -----------------------------------------------------

    def count_matrix(self, entities: list[str], event_type: str, source_type: str, offset: int) -> np.ndarray:
        """Counts at one target offset as an (n_entities, n_periods) array."""
        out = np.zeros((len(entities), self.calendar.n_periods))
        index = {c: row for row, c in enumerate(entities)}
        for (c, e, s, i, k), n in self.counts.items():
            if e == event_type and s == source_type and k == offset and c in index:
                out[index[c], i] = n
        return out

    def offset_total_matrix(self, entities: list[str], event_type: str, source_type: str) -> np.ndarray:
        """Counts summed over every target offset, per publish period."""
        out = np.zeros((len(entities), self.calendar.n_periods))
        index = {c: row for row, c in enumerate(entities)}
        for (c, e, s, i, _k), n in self.counts.items():
            if e == event_type and s == source_type and c in index:
                out[index[c], i] += n
        return out

    def violence_matrix(self, entities: list[str], event_type: str, source_type: str) -> np.ndarray:
        out = np.zeros((len(entities), self.calendar.n_periods))
        index = {c: row for row, c in enumerate(entities)}
        for (c, e, s, i), v in self.violence.items():
            if e == event_type and s == source_type and c in index:
                out[index[c], i] = v
        return out


@dataclass
class IngestResult:
    cube: CountCube
    accepted: int
    rejected: Counter


def ingest(
    records: Iterable,
    calendar: Calendar,
    event_types: Iterable[str] | None = None,
) -> IngestResult:
    """Tally validated records into a cube; misfits are counted, not fatal.

    `records` may mix MentionRecord objects with ValidationErrors (as
    produced by records.read_records), so file parsing failures land in the
    same rejection tally as semantic ones.
    """
    allowed = set(event_types) if event_types is not None else None
    counts: dict = {}
    violence: dict = {}
    rejected: Counter = Counter()
    accepted = 0
    for rec in records:
        if isinstance(rec, ValidationError):
            rejected["malformed"] += 1
            continue
        try:
            rec.validate(calendar, allowed)
        except ValidationError as exc:
            rejected[_reason(exc)] += 1
            continue
        i = calendar.index_unchecked(rec.publish_day)
        k = calendar.index_unchecked(rec.target_day) - i
        key = (rec.entity_id, rec.event_type, rec.source_type, i, k)
        counts[key] = counts.get(key, 0) + 1
        vkey = key[:4]
        violence[vkey] = violence.get(vkey, 0.0) + rec.violence_score
        accepted += 1
    return IngestResult(CountCube(calendar, counts, violence), accepted, rejected)


def _reason(exc: ValidationError) -> str:
    msg = str(exc)
    for tag in ("entity_kind", "source_type", "event_type", "violence_score",
                "publish_day", "target_day", "parent_entity"):
        if tag in msg:
            return tag
    return "invalid"


def merge(cubes: Iterable[CountCube]) -> CountCube:
    """Add shard cubes together (associative and commutative)."""
    cubes = list(cubes)
    if not cubes:
        raise ValidationError("merge of zero cubes")
    calendar = cubes[0].calendar
    counts: dict = {}
    violence: dict = {}
    for cube in cubes:
        if cube.calendar != calendar:
            raise ValidationError("cannot merge cubes over different calendars")
        for key, n in cube.counts.items():
            counts[key] = counts.get(key, 0) + n
        for key, v in cube.violence.items():
            violence[key] = violence.get(key, 0.0) + v
    return CountCube(calendar, counts, violence)


def aggregate_weekly(cube: CountCube, weekly_calendar: Calendar | None = None) -> CountCube:
    """Re-express a day cube at week granularity.

    Week counts are sums over the contained days; a mention's new offset is
    target week minus publish week, so totals are conserved exactly.
    """
    if cube.granularity != "day":
        raise ValidationError("aggregate_weekly expects a day-granularity cube")
    wcal = weekly_calendar or cube.calendar.weekly()
    if wcal.granularity != "week":
        raise ValidationError("weekly calendar expected")
    counts: dict = {}
    violence: dict = {}
    for (c, e, s, i, k), n in cube.counts.items():
        pub = cube.calendar.date(i)
        wi = wcal.index_unchecked(pub)
        wk = wcal.index_unchecked(pub + dt.timedelta(days=k)) - wi
        key = (c, e, s, wi, wk)
        counts[key] = counts.get(key, 0) + n
    for (c, e, s, i), v in cube.violence.items():
        wi = wcal.index_unchecked(cube.calendar.date(i))
        key = (c, e, s, wi)
        violence[key] = violence.get(key, 0.0) + v
    return CountCube(wcal, counts, violence)


def pool_sources(cube: CountCube, pooled: str = ANY_SOURCE, sources: Iterable[str] | None = None) -> CountCube:
    """Return a cube extended with an all-sources series under `pooled`.

    Every mention is counted once more at source `pooled`, giving the
    "any resolvable source" view alongside the per-source ones.
    """
    wanted = set(sources) if sources is not None else None
    counts = dict(cube.counts)
    violence = dict(cube.violence)
    for (c, e, s, i, k), n in cube.counts.items():
        if s == pooled or (wanted is not None and s not in wanted):
            continue
        key = (c, e, pooled, i, k)
        counts[key] = counts.get(key, 0) + n
    for (c, e, s, i), v in cube.violence.items():
        if s == pooled or (wanted is not None and s not in wanted):
            continue
        key = (c, e, pooled, i)
        violence[key] = violence.get(key, 0.0) + v
    return CountCube(cube.calendar, counts, violence)


# -- sparse-table serialization (diff-friendly snapshots) -----------------


def dump_cube(cube: CountCube, out) -> None:
    cal = cube.calendar
    out.write(f"# {CUBE_FORMAT}\n")
    out.write(f"# calendar {cal.corpus_start} {cal.corpus_end} {cal.train_end} "
              f"{cal.test_start} {cal.granularity} {cal.week_start}\n")
    for key in sorted(cube.counts):
        c, e, s, i, k = key
        out.write(f"count\t{c}\t{e}\t{s}\t{i}\t{k}\t{cube.counts[key]}\n")
    for key in sorted(cube.violence):
        c, e, s, i = key
        out.write(f"violence\t{c}\t{e}\t{s}\t{i}\t{cube.violence[key]:.9g}\n")


def load_cube(lines: Iterable[str]) -> CountCube:
    calendar = None
    counts: dict = {}
    violence: dict = {}
    for ln, line in enumerate(lines, start=1):
        line = line.rstrip("\n")
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if parts and parts[0] == "calendar":
                calendar = Calendar(
                    corpus_start=parse_date(parts[1]),
                    corpus_end=parse_date(parts[2]),
                    train_end=parse_date(parts[3]),
                    test_start=parse_date(parts[4]),
                    granularity=parts[5],
                    week_start=int(parts[6]),
                )
            continue
        fields = line.split("\t")
        if fields[0] == "count" and len(fields) == 7:
            c, e, s, i, k, n = fields[1:]
            counts[(c, e, s, int(i), int(k))] = int(n)
        elif fields[0] == "violence" and len(fields) == 6:
            c, e, s, i, v = fields[1:]
            violence[(c, e, s, int(i))] = float(v)
        else:
            raise ValidationError(f"bad cube line {ln}: {line!r}")
    if calendar is None:
        raise ValidationError("cube file has no calendar header")
    return CountCube(calendar, counts, violence)
