"""Corpus calendar: date <-> period-index mapping and train/test splits.

A calendar covers a closed date range at day or week granularity. Period
indexes are dense integers starting at 0, so downstream arrays can be
indexed directly. Week indexing snaps to a configured week-start day
(Monday by default), so the first and last weeks may be partial.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field

from .errors import ValidationError

DAY = "day"
WEEK = "week"

_WEEKDAYS = ["monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday"]


def parse_date(text: str) -> dt.date:
    try:
        return dt.date.fromisoformat(text)
    except ValueError as exc:
        raise ValidationError(f"bad ISO date {text!r}") from exc


def week_start_number(name: str | int) -> int:
    """Normalize a week-start spec ('monday', 'Mon', 0) to 0..6 (Monday=0)."""
    if isinstance(name, int):
        if not 0 <= name <= 6:
            raise ValidationError(f"week start {name} not in 0..6")
        return name
    low = name.strip().lower()
    for i, day in enumerate(_WEEKDAYS):
        if day.startswith(low) and low:
            return i
    raise ValidationError(f"unknown week start {name!r}")


@dataclass(frozen=True)
class Calendar:
    """Date range with a train/test split and a bijective period index.

    Invariant: corpus_start < train_end < test_start <= corpus_end. At day
    granularity, index(d) = days since corpus_start. At week granularity,
    index(d) counts whole weeks since the week containing corpus_start,
    where weeks begin on `week_start` (0 = Monday).
    """

    corpus_start: dt.date
    corpus_end: dt.date
    train_end: dt.date
    test_start: dt.date
    granularity: str = DAY
    week_start: int = 0
    _anchor: dt.date = field(init=False, repr=False)

    def __post_init__(self):
        if self.granularity not in (DAY, WEEK):
            raise ValidationError(f"granularity must be day or week, got {self.granularity!r}")
        if not (self.corpus_start < self.train_end < self.test_start <= self.corpus_end):
            raise ValidationError(
                "calendar must satisfy corpus_start < train_end < test_start <= corpus_end, "
                f"got {self.corpus_start} / {self.train_end} / {self.test_start} / {self.corpus_end}"
            )
        if not 0 <= self.week_start <= 6:
            raise ValidationError(f"week_start {self.week_start} not in 0..6")
        back = (self.corpus_start.weekday() - self.week_start) % 7
        object.__setattr__(self, "_anchor", self.corpus_start - dt.timedelta(days=back))

    # -- index mapping -------------------------------------------------

    def index(self, day: dt.date) -> int:
        """Period index of a date; raises if outside the corpus range."""
        if not self.covers(day):
            raise ValidationError(f"date {day} outside corpus {self.corpus_start}..{self.corpus_end}")
        return self.index_unchecked(day)

    def index_unchecked(self, day: dt.date) -> int:
        if self.granularity == DAY:
            return (day - self.corpus_start).days
        return (day - self._anchor).days // 7

    def date(self, index: int) -> dt.date:
        """First date of the period with the given index."""
        if self.granularity == DAY:
            return self.corpus_start + dt.timedelta(days=index)
        return self._anchor + dt.timedelta(days=7 * index)

    def covers(self, day: dt.date) -> bool:
        return self.corpus_start <= day <= self.corpus_end

    @property
    def n_periods(self) -> int:
        return self.index_unchecked(self.corpus_end) + 1

    # -- splits ----------------------------------------------------------

    @property
    def train_end_index(self) -> int:
        return self.index_unchecked(self.train_end)

    @property
    def test_start_index(self) -> int:
        return self.index_unchecked(self.test_start)

    def train_indices(self, start: int = 0) -> range:
        """Training period indexes, optionally starting past a warm-up."""
        return range(start, self.train_end_index + 1)

    def test_indices(self) -> range:
        return range(self.test_start_index, self.n_periods)

    # -- conversions ----------------------------------------------------

    def weekly(self) -> "Calendar":
        """The same calendar viewed at week granularity.

        Split boundaries snap so that the week containing train_end stays in
        training and test starts at the following week.
        """
        if self.granularity == WEEK:
            return self
        anchor_back = (self.corpus_start.weekday() - self.week_start) % 7
        anchor = self.corpus_start - dt.timedelta(days=anchor_back)
        train_week = (self.train_end - anchor).days // 7
        train_end = anchor + dt.timedelta(days=7 * train_week + 6)
        test_start = train_end + dt.timedelta(days=1)
        if test_start > self.corpus_end:
            raise ValidationError("corpus too short to keep a test week after snapping")
        return Calendar(
            corpus_start=self.corpus_start,
            corpus_end=self.corpus_end,
            train_end=min(train_end, self.corpus_end - dt.timedelta(days=1)),
            test_start=test_start,
            granularity=WEEK,
            week_start=self.week_start,
        )
