"""Append-only NDJSON persistence for events, readings, settings and meals.

One directory per patient:

    events.ndjson    -- one canonical DiaryEvent JSON object per line
    readings.ndjson  -- one {"timestamp", "value"} object per line
    settings.json    -- PatientSettings document
    meals.json       -- list of MealProfile documents

Appends are validated, serialized under a lock and flushed to disk before
returning.  Readers always see a consistent prefix; a torn final line left by
a crash is ignored on reopen.  Replaying a log folds to a deterministic
derived state whose hash is stable across runs and platforms.
"""
from __future__ import annotations

import hashlib
import json
import os
import threading
from dataclasses import dataclass
from datetime import date, datetime, time, timedelta, timezone
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .domain import (
    DiaryEvent,
    EventKind,
    GlucoseReading,
    InvariantViolation,
    MealProfile,
    PatientSettings,
    event_from_dict,
    event_to_dict,
    format_timestamp,
    meal_profile_from_dict,
    meal_profile_to_dict,
    reading_from_dict,
    reading_to_dict,
    settings_from_dict,
    settings_to_dict,
    validate_event,
    validate_meal_profile,
    validate_reading,
    validate_settings,
)

HYPO_SEPARATION_READINGS = 3   # readings above band required before a new episode


class StorageFailure(RuntimeError):
    """Underlying file I/O failed."""


def _load_ndjson(path: Path) -> list[dict]:
    if not path.exists():
        return []
    records = []
    try:
        with path.open(encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise StorageFailure(f"cannot read {path}: {exc}") from exc
    for i, line in enumerate(lines):
        if not line.strip():
            continue
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError as exc:
            if i == len(lines) - 1:
                break  # torn final line from a crash; ignore
            raise StorageFailure(f"{path}:{i + 1}: malformed record: {exc}") from exc
    return records


def _append_line(path: Path, record: dict) -> None:
    line = json.dumps(record, separators=(",", ":"))
    try:
        with path.open("a", encoding="utf-8") as fh:
            fh.write(line + "\n")
            fh.flush()
            os.fsync(fh.fileno())
    except OSError as exc:
        raise StorageFailure(f"cannot append to {path}: {exc}") from exc


def _write_json_atomic(path: Path, document) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    try:
        with tmp.open("w", encoding="utf-8") as fh:
            json.dump(document, fh, indent=2)
            fh.write("\n")
            fh.flush()
            os.fsync(fh.fileno())
        tmp.replace(path)
    except OSError as exc:
        raise StorageFailure(f"cannot write {path}: {exc}") from exc


@dataclass(frozen=True)
class PeriodStatistics:
    period: str
    start: date
    end: date               # exclusive
    total_insulin: float    # U
    pct_time_in_range: float
    hypo_count: int
    exercise_minutes: float

    def to_dict(self) -> dict:
        return {
            "period": self.period,
            "start": self.start.isoformat(),
            "end": self.end.isoformat(),
            "total_insulin": self.total_insulin,
            "pct_time_in_range": self.pct_time_in_range,
            "hypo_count": self.hypo_count,
            "exercise_minutes": self.exercise_minutes,
        }


class EventStore:
    """Single-writer store for one patient's diary, readings and library."""

    def __init__(self, data_dir) -> None:
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._events_path = self.data_dir / "events.ndjson"
        self._readings_path = self.data_dir / "readings.ndjson"
        self._settings_path = self.data_dir / "settings.json"
        self._meals_path = self.data_dir / "meals.json"
        self._lock = threading.Lock()

        self._events: list[DiaryEvent] = [
            event_from_dict(raw) for raw in _load_ndjson(self._events_path)
        ]
        self._readings: list[GlucoseReading] = [
            reading_from_dict(raw) for raw in _load_ndjson(self._readings_path)
        ]
        if self._settings_path.exists():
            with self._settings_path.open(encoding="utf-8") as fh:
                self._settings = settings_from_dict(json.load(fh))
        else:
            self._settings = PatientSettings()
        if self._meals_path.exists():
            with self._meals_path.open(encoding="utf-8") as fh:
                self._meals = [meal_profile_from_dict(raw) for raw in json.load(fh)]
        else:
            self._meals = []

    # -- events ------------------------------------------------------------

    def append(self, event: DiaryEvent) -> int:
        """Validate and durably append; returns the 1-based sequence number."""
        with self._lock:
            validate_event(event, self._events)
            _append_line(self._events_path, event_to_dict(event))
            self._events.append(event)
            return len(self._events)

    def append_all(self, events: Iterable[DiaryEvent]) -> list[int]:
        return [self.append(event) for event in events]

    def append_transaction(self, events: Sequence[DiaryEvent]) -> list[int]:
        """Append several events atomically: all validated first, then written."""
        with self._lock:
            context = list(self._events)
            for event in events:
                validate_event(event, context)
                context.append(event)
            for event in events:
                _append_line(self._events_path, event_to_dict(event))
            self._events = context
            n = len(self._events)
            return list(range(n - len(events) + 1, n + 1))

    def events(self) -> tuple[DiaryEvent, ...]:
        with self._lock:
            return tuple(self._events)

    def query(
        self,
        start: Optional[datetime] = None,
        end: Optional[datetime] = None,
        kinds: Optional[Iterable[EventKind]] = None,
    ) -> list[DiaryEvent]:
        """Events in the half-open interval [start, end), optionally by kind."""
        if start is not None and end is not None and end < start:
            raise ValueError("query interval end precedes start")
        kind_set = set(kinds) if kinds is not None else None
        out = []
        for event in self.events():
            if start is not None and event.timestamp < start:
                continue
            if end is not None and event.timestamp >= end:
                continue
            if kind_set is not None and event.kind not in kind_set:
                continue
            out.append(event)
        return out

    # -- readings ----------------------------------------------------------

    def ingest_reading(self, reading: GlucoseReading) -> None:
        with self._lock:
            validate_reading(reading)
            if self._readings and reading.timestamp <= self._readings[-1].timestamp:
                raise InvariantViolation(
                    "readings must form a strictly increasing time sequence"
                )
            _append_line(self._readings_path, reading_to_dict(reading))
            self._readings.append(reading)

    def ingest_readings(self, readings: Iterable[GlucoseReading]) -> None:
        for reading in readings:
            self.ingest_reading(reading)

    def readings(
        self, start: Optional[datetime] = None, end: Optional[datetime] = None
    ) -> list[GlucoseReading]:
        with self._lock:
            snapshot = list(self._readings)
        if start is None and end is None:
            return snapshot
        return [
            r for r in snapshot
            if (start is None or r.timestamp >= start)
            and (end is None or r.timestamp < end)
        ]

    def latest_reading(self) -> Optional[GlucoseReading]:
        with self._lock:
            return self._readings[-1] if self._readings else None

    # -- settings and meal library ------------------------------------------

    def get_settings(self) -> PatientSettings:
        return self._settings

    def put_settings(self, settings: PatientSettings) -> PatientSettings:
        validate_settings(settings)
        with self._lock:
            _write_json_atomic(self._settings_path, settings_to_dict(settings))
            self._settings = settings
        return settings

    def meal_profiles(self) -> tuple[MealProfile, ...]:
        with self._lock:
            return tuple(self._meals)

    def add_meal_profile(self, profile: MealProfile) -> MealProfile:
        with self._lock:
            validate_meal_profile(profile)
            if any(p.id == profile.id for p in self._meals):
                raise InvariantViolation(f"duplicate meal profile id {profile.id!r}")
            self._meals.append(profile)
            _write_json_atomic(
                self._meals_path, [meal_profile_to_dict(p) for p in self._meals]
            )
        return profile

    # -- aggregates ----------------------------------------------------------

    def period_statistics(self, period: str, at: date) -> PeriodStatistics:
        """Insulin, time-in-range, hypo episodes and exercise for a calendar period."""
        start_day, end_day = _period_bounds(period, at)
        start = datetime.combine(start_day, time.min, tzinfo=timezone.utc)
        end = datetime.combine(end_day, time.min, tzinfo=timezone.utc)

        total_insulin = 0.0
        exercise_minutes = 0.0
        for event in self.query(start, end):
            if event.kind is EventKind.INSULIN_DOSE:
                total_insulin += event.payload.units
            elif event.kind is EventKind.EXERCISE:
                exercise_minutes += event.payload.duration

        readings = self.readings(start, end)
        hypo = self._settings.hypo_threshold
        hyper = self._settings.hyper_threshold
        n_in = sum(1 for r in readings if hypo <= r.value <= hyper)
        pct = 100.0 * n_in / len(readings) if readings else 0.0
        return PeriodStatistics(
            period=period,
            start=start_day,
            end=end_day,
            total_insulin=total_insulin,
            pct_time_in_range=pct,
            hypo_count=count_hypo_episodes(readings, hypo),
            exercise_minutes=exercise_minutes,
        )

    # -- replay determinism ---------------------------------------------------

    def fold_state(self) -> dict:
        return fold_state(self.events(), self.readings())

    def state_hash(self) -> str:
        return state_hash(self.events(), self.readings())


def _period_bounds(period: str, at: date) -> tuple[date, date]:
    if period == "day":
        return at, at + timedelta(days=1)
    if period == "week":
        start = at - timedelta(days=at.weekday())  # Monday
        return start, start + timedelta(days=7)
    if period == "month":
        start = at.replace(day=1)
        if start.month == 12:
            end = start.replace(year=start.year + 1, month=1)
        else:
            end = start.replace(month=start.month + 1)
        return start, end
    raise ValueError(f"unknown period {period!r}; expected day, week or month")


def count_hypo_episodes(readings: Sequence[GlucoseReading], hypo_threshold: float) -> int:
    """Entries into the low band.

    A run of consecutive low readings counts once; a new episode requires at
    least HYPO_SEPARATION_READINGS readings at or above the threshold (15
    minutes at CGM cadence) since the previous one.
    """
    episodes = 0
    in_low = False
    above_run = HYPO_SEPARATION_READINGS  # stream start counts as long-above
    for reading in readings:
        if reading.value < hypo_threshold:
            if not in_low and above_run >= HYPO_SEPARATION_READINGS:
                episodes += 1
            in_low = True
            above_run = 0
        else:
            above_run += 1
            in_low = False
    return episodes


def fold_state(
    events: Sequence[DiaryEvent], readings: Sequence[GlucoseReading]
) -> dict:
    """Deterministic left fold of the full log into derived aggregate state."""
    digest = hashlib.sha256()
    kind_counts = {kind.value: 0 for kind in EventKind}
    total_insulin = 0.0
    total_carbs = 0.0
    exercise_minutes = 0.0
    last_event_ts = None
    for event in events:
        digest.update(json.dumps(event_to_dict(event), sort_keys=True).encode())
        kind_counts[event.kind.value] += 1
        if event.kind is EventKind.INSULIN_DOSE:
            total_insulin += event.payload.units
        elif event.kind is EventKind.MEAL:
            total_carbs += event.payload.carbs
        elif event.kind is EventKind.EXERCISE:
            exercise_minutes += event.payload.duration
        last_event_ts = event.timestamp
    for reading in readings:
        digest.update(json.dumps(reading_to_dict(reading), sort_keys=True).encode())
    return {
        "n_events": len(events),
        "n_readings": len(readings),
        "kind_counts": kind_counts,
        "total_insulin": total_insulin,
        "total_carbs": total_carbs,
        "exercise_minutes": exercise_minutes,
        "last_event_ts": format_timestamp(last_event_ts) if last_event_ts else None,
        "last_reading_ts": (
            format_timestamp(readings[-1].timestamp) if readings else None
        ),
        "content_digest": digest.hexdigest(),
    }


def state_hash(
    events: Sequence[DiaryEvent], readings: Sequence[GlucoseReading]
) -> str:
    folded = fold_state(events, readings)
    return hashlib.sha256(
        json.dumps(folded, sort_keys=True).encode("utf-8")
    ).hexdigest()
