"""Mention records: the one-line-per-record input contract.

Each record states that an event of some type involving some entity is said
(by a document published on publish_day, from a source of some type) to take
place on target_day. Records arrive as newline-delimited JSON with ISO-8601
dates; unknown extra fields are ignored.
"""

from __future__ import annotations

import datetime as dt
import json
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator, TextIO

from .calendar import Calendar, parse_date
from .errors import ValidationError

ENTITY_KINDS = ("country", "city", "organization", "person", "other")
SOURCE_TYPES = ("mainstream", "twitter", "social_media", "blog", "any")

# Pseudo source naming the pooled all-sources series (see cube.pool_sources).
ANY_SOURCE = "any"


@dataclass(frozen=True)
class MentionRecord:
    entity_id: str
    entity_kind: str
    event_type: str
    source_type: str
    publish_day: dt.date
    target_day: dt.date
    violence_score: float = 0.0
    parent_entity: str | None = None

    def validate(self, calendar: Calendar, event_types: Iterable[str] | None = None) -> None:
        """Raise ValidationError naming the first violated invariant."""
        if self.entity_kind not in ENTITY_KINDS:
            raise ValidationError(f"unknown entity_kind {self.entity_kind!r}")
        if self.source_type not in SOURCE_TYPES:
            raise ValidationError(f"unknown source_type {self.source_type!r}")
        if event_types is not None and self.event_type not in event_types:
            raise ValidationError(f"unknown event_type {self.event_type!r}")
        if not 0.0 <= self.violence_score <= 1.0:
            raise ValidationError(f"violence_score {self.violence_score} outside [0, 1]")
        if not calendar.covers(self.publish_day):
            raise ValidationError(f"publish_day {self.publish_day} outside corpus range")
        if not calendar.covers(self.target_day):
            raise ValidationError(f"target_day {self.target_day} outside corpus range")
        if self.entity_kind == "city" and not self.parent_entity:
            raise ValidationError(f"city {self.entity_id!r} has no parent_entity")

    def to_json(self) -> str:
        obj = {
            "entity_id": self.entity_id,
            "entity_kind": self.entity_kind,
            "event_type": self.event_type,
            "source_type": self.source_type,
            "publish_day": self.publish_day.isoformat(),
            "target_day": self.target_day.isoformat(),
            "violence_score": self.violence_score,
        }
        if self.parent_entity is not None:
            obj["parent_entity"] = self.parent_entity
        return json.dumps(obj, sort_keys=True)


_REQUIRED = ("entity_id", "entity_kind", "event_type", "source_type", "publish_day", "target_day")


def record_from_json(line: str) -> MentionRecord:
    """Parse one JSONL line; raises ValidationError on malformed input."""
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ValidationError("record line is not an object")
    missing = [k for k in _REQUIRED if k not in obj]
    if missing:
        raise ValidationError(f"missing fields: {', '.join(missing)}")
    try:
        score = float(obj.get("violence_score", 0.0))
    except (TypeError, ValueError) as exc:
        raise ValidationError("violence_score is not a number") from exc
    return MentionRecord(
        entity_id=str(obj["entity_id"]),
        entity_kind=str(obj["entity_kind"]),
        event_type=str(obj["event_type"]),
        source_type=str(obj["source_type"]),
        publish_day=parse_date(str(obj["publish_day"])),
        target_day=parse_date(str(obj["target_day"])),
        violence_score=score,
        parent_entity=(None if obj.get("parent_entity") in (None, "") else str(obj["parent_entity"])),
    )


def read_records(lines: Iterable[str]) -> Iterator[MentionRecord | ValidationError]:
    """Yield parsed records, or the ValidationError for unparseable lines.

    Validation against a calendar/vocabulary happens later, at ingest; this
    only handles line-level structure so callers can tally both kinds of
    rejection.
    """
    for line in lines:
        line = line.strip()
        if not line:
            continue
        try:
            yield record_from_json(line)
        except ValidationError as exc:
            yield exc


def write_records(records: Iterable[MentionRecord], out: TextIO) -> int:
    n = 0
    for rec in records:
        out.write(rec.to_json())
        out.write("\n")
        n += 1
    return n


def rejection_tally() -> Counter:
    return Counter()
