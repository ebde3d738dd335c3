"""Reading playtime data and turning session logs into censored durations.

Two CSV layouts are supported, both UTF-8 with a header row:

durations
    ``player_id,duration_hours,censored`` with ``censored`` in {0, 1}
    (``true``/``false`` also accepted on input). Extra columns are allowed
    and can be used as strata.
sessions
    ``player_id,start_iso8601,end_iso8601``; timestamps carry a UTC offset.
"""

import csv
import math
from collections import defaultdict
from dataclasses import dataclass
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np

from .core import Cohort
from .errors import InvalidInputError

DURATION_COLUMNS = ("player_id", "duration_hours", "censored")
SESSION_COLUMNS = ("player_id", "start_iso8601", "end_iso8601")

_FLAGS = {"0": False, "1": True, "false": False, "true": True}


@dataclass(frozen=True)
class SessionRecord:
    player_id: str
    start: datetime
    end: datetime

    def __post_init__(self):
        if not self.player_id:
            raise InvalidInputError("session record has an empty player_id")
        if self.start.tzinfo is None or self.end.tzinfo is None:
            raise InvalidInputError(f"timestamps for {self.player_id} need a UTC offset")
        if self.end < self.start:
            raise InvalidInputError(
                f"session for {self.player_id} ends before it starts ({self.start} > {self.end})"
            )


@dataclass(frozen=True)
class IngestConfig:
    """Rules for turning sessions into durations.

    A player whose last activity lies within `inactivity_window` of the
    cutoff may still return, so their playtime is marked censored.
    """

    collection_cutoff: datetime
    inactivity_window: timedelta = timedelta(days=14)
    min_total_playtime: timedelta = timedelta(0)
    time_resolution: timedelta = timedelta(seconds=1)

    def __post_init__(self):
        if self.inactivity_window <= timedelta(0):
            raise InvalidInputError("inactivity window must be positive")
        if self.time_resolution <= timedelta(0):
            raise InvalidInputError("time resolution must be positive")
        if self.collection_cutoff.tzinfo is None:
            raise InvalidInputError("collection cutoff needs a UTC offset")

    @property
    def resolution_hours(self):
        return self.time_resolution.total_seconds() / 3600.0


def parse_timestamp(text):
    """ISO-8601 timestamp with offset; a trailing ``Z`` means UTC."""
    text = text.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    try:
        ts = datetime.fromisoformat(text)
    except ValueError:
        raise InvalidInputError(f"not an ISO-8601 timestamp: {text!r}") from None
    if ts.tzinfo is None:
        raise InvalidInputError(f"timestamp {text!r} lacks a UTC offset")
    return ts


def _merged_length(intervals):
    total = timedelta(0)
    cur_start = cur_end = None
    for start, end in sorted(intervals):
        if cur_end is None or start > cur_end:
            if cur_end is not None:
                total += cur_end - cur_start
            cur_start, cur_end = start, end
        elif end > cur_end:
            cur_end = end
    if cur_end is not None:
        total += cur_end - cur_start
    return total


def aggregate_sessions(records, config, label=""):
    """Total playtime per player with inactivity-based censoring.

    Overlapping sessions of one player are merged before summing. Totals
    are rounded to ``config.time_resolution`` before conversion to hours.
    Players are ordered by id.
    """
    by_player = defaultdict(list)
    for rec in records:
        if rec.end > config.collection_cutoff:
            raise InvalidInputError(
                f"session of {rec.player_id} ending {rec.end.isoformat()} is after the cutoff"
            )
        if rec.end < rec.start:
            raise InvalidInputError(f"session of {rec.player_id} ends before it starts")
        by_player[rec.player_id].append((rec.start, rec.end))

    res = config.time_resolution.total_seconds()
    ids, hours, censored = [], [], []
    for pid in sorted(by_player):
        spans = by_player[pid]
        total = _merged_length(spans)
        if total <= config.min_total_playtime:
            continue
        units = round(total.total_seconds() / res)
        last_end = max(end for _, end in spans)
        ids.append(pid)
        hours.append(units * res / 3600.0)
        censored.append(config.collection_cutoff - last_end < config.inactivity_window)
    return Cohort(np.array(hours, dtype=float), np.array(censored, dtype=bool), label, tuple(ids))


def _open_rows(path, required):
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise InvalidInputError(f"{path}: missing header row") from None
        missing = [c for c in required if c not in header]
        if missing:
            raise InvalidInputError(f"{path}: header lacks column(s) {', '.join(missing)}")
        rows = []
        for row in reader:
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise InvalidInputError(
                    f"{path}:{reader.line_num}: expected {len(header)} fields, got {len(row)}"
                )
            rows.append((reader.line_num, dict(zip(header, (c.strip() for c in row)))))
    return rows


def _parse_duration_row(path, line, row):
    try:
        hours = float(row["duration_hours"])
    except ValueError:
        raise InvalidInputError(f"{path}:{line}: bad duration {row['duration_hours']!r}") from None
    if not math.isfinite(hours) or hours < 0:
        raise InvalidInputError(f"{path}:{line}: duration must be a non-negative number")
    flag = row["censored"].lower()
    if flag not in _FLAGS:
        raise InvalidInputError(f"{path}:{line}: unknown censor flag {row['censored']!r}")
    return row["player_id"], hours, _FLAGS[flag]


def read_durations(path, label=None):
    """Load a durations CSV into a :class:`Cohort` (label defaults to the file stem)."""
    rows = _open_rows(path, DURATION_COLUMNS)
    parsed = [_parse_duration_row(path, line, row) for line, row in rows]
    return Cohort(
        np.array([p[1] for p in parsed], dtype=float),
        np.array([p[2] for p in parsed], dtype=bool),
        Path(path).stem if label is None else label,
        tuple(p[0] for p in parsed),
    )


def read_strata(path, column):
    """Split a durations CSV into one cohort per value of `column`."""
    rows = _open_rows(path, DURATION_COLUMNS + (column,))
    groups = defaultdict(list)
    for line, row in rows:
        groups[row[column]].append(_parse_duration_row(path, line, row))
    return {
        key: Cohort(
            np.array([p[1] for p in items], dtype=float),
            np.array([p[2] for p in items], dtype=bool),
            key,
            tuple(p[0] for p in items),
        )
        for key, items in sorted(groups.items())
    }


def format_hours(x):
    """Decimal hours with at most 6 fractional digits, trailing zeros dropped."""
    text = f"{x:.6f}".rstrip("0").rstrip(".")
    return text or "0"


def write_durations(cohort, path):
    """Write a durations CSV. ``read_durations`` returns an equal cohort
    whenever the durations are exact at 6 decimals."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        write_durations_to(cohort, fh)


def write_durations_to(cohort, fh):
    """Write a durations CSV to an open text stream."""
    ids = cohort.ids or tuple(f"p{i}" for i in range(cohort.size))
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(DURATION_COLUMNS)
    for pid, t, c in zip(ids, cohort.durations, cohort.censored):
        writer.writerow([pid, format_hours(float(t)), int(bool(c))])


def read_sessions(path):
    rows = _open_rows(path, SESSION_COLUMNS)
    records = []
    for line, row in rows:
        try:
            start = parse_timestamp(row["start_iso8601"])
            end = parse_timestamp(row["end_iso8601"])
            records.append(SessionRecord(row["player_id"], start, end))
        except InvalidInputError as exc:
            raise InvalidInputError(f"{path}:{line}: {exc}") from None
    return records


def write_sessions(records, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SESSION_COLUMNS)
        for rec in records:
            writer.writerow([rec.player_id, rec.start.isoformat(), rec.end.isoformat()])
