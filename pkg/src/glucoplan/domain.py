"""Domain types, validation and patient settings shared across the package.

Units are metric throughout: glucose in mmol/L, carbohydrate/protein/fat in
grams, insulin in units (U), durations in minutes.  Timestamps are
timezone-aware UTC datetimes with whole-second precision and serialize as
RFC 3339 strings.
"""
from __future__ import annotations

import json
import uuid
from dataclasses import dataclass
from datetime import datetime, time, timezone
from enum import Enum
from typing import Optional, Sequence, Union

GLUCOSE_MIN_MMOL = 0.0    # exclusive
GLUCOSE_MAX_MMOL = 40.0   # inclusive
MAX_MEAL_CARBS_G = 500.0
MAX_DOSE_UNITS = 50.0
MAX_EXERCISE_MINUTES = 600.0
DOSE_STEP_UNITS = 0.5     # pen-injector granularity

# Default exercise vocabulary for menus; membership is not a validity rule,
# users may add their own types in settings.
DEFAULT_EXERCISE_TYPES = (
    "walking", "running", "cycling", "swimming", "gym", "yoga", "skiing",
)


class InvariantViolation(ValueError):
    """A domain invariant does not hold for the given value."""


class OutOfOrder(ValueError):
    """Timestamp is earlier than the head of the log it extends."""


class EventKind(str, Enum):
    MEAL = "meal"
    EXERCISE = "exercise"
    INSULIN_DOSE = "insulin_dose"
    HEALTH_FLAG = "health_flag"


class MealCategory(str, Enum):
    BREAKFAST = "breakfast"
    LUNCH = "lunch"
    MEAL = "meal"
    SNACK = "snack"


class HealthFlag(str, Enum):
    STRESS_ON = "stress_on"
    STRESS_OFF = "stress_off"
    ILLNESS_ON = "illness_on"
    ILLNESS_OFF = "illness_off"


class DoseSource(str, Enum):
    RECOMMENDED = "recommended"
    MANUAL = "manual"


@dataclass(frozen=True)
class GlucoseReading:
    """One timestamped CGM sample (5-minute cadence)."""
    timestamp: datetime
    value: float  # mmol/L, in (0, 40]


@dataclass(frozen=True)
class MealEventPayload:
    carbs: float            # g
    protein: float = 0.0    # g
    fat: float = 0.0        # g
    alcohol_units: float = 0.0
    meal_profile_id: Optional[str] = None
    category: MealCategory = MealCategory.MEAL


@dataclass(frozen=True)
class ExerciseEventPayload:
    exercise_type: str
    intensity: int          # level 1..3
    duration: float         # minutes, > 0


@dataclass(frozen=True)
class InsulinDosePayload:
    units: float            # U, multiple of 0.5
    source: DoseSource = DoseSource.MANUAL


@dataclass(frozen=True)
class HealthFlagPayload:
    flag: HealthFlag


EventPayload = Union[
    MealEventPayload, ExerciseEventPayload, InsulinDosePayload, HealthFlagPayload
]

_PAYLOAD_TYPES = {
    EventKind.MEAL: MealEventPayload,
    EventKind.EXERCISE: ExerciseEventPayload,
    EventKind.INSULIN_DOSE: InsulinDosePayload,
    EventKind.HEALTH_FLAG: HealthFlagPayload,
}


@dataclass(frozen=True)
class DiaryEvent:
    """Discriminated union of meal, exercise, insulin dose and health-flag events."""
    id: str
    timestamp: datetime
    kind: EventKind
    payload: EventPayload


@dataclass(frozen=True)
class MealProfile:
    """A saved favourite meal with macronutrients and an image reference."""
    id: str
    name: str
    carbs: float
    protein: float
    fat: float
    image_ref: str
    category: MealCategory
    created_at: datetime


@dataclass(frozen=True)
class PatientSettings:
    """Therapy parameters and glycemic bands.

    ICR is grams of carbohydrate covered by one unit of insulin, ISF the
    glucose drop (mmol/L) per unit, DIA the duration of insulin action in
    minutes.  Band defaults follow the international time-in-range consensus
    (low < 3.9, high > 10.0 mmol/L).
    """
    ICR: float = 10.0
    ISF: float = 3.0
    G_target: float = 6.5
    DIA: float = 240.0
    hypo_threshold: float = 3.9
    hyper_threshold: float = 10.0
    alert_low: float = 3.9
    alert_high: float = 13.9


# ---------------------------------------------------------------------------
# timestamps

def ensure_utc(ts: datetime) -> datetime:
    """Attach UTC to naive datetimes, convert aware ones to UTC."""
    if ts.tzinfo is None:
        return ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def format_timestamp(ts: datetime) -> str:
    return ensure_utc(ts).isoformat()


def parse_timestamp(raw: str) -> datetime:
    """Parse an RFC 3339 string; fractional seconds are truncated."""
    text = raw.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    try:
        ts = datetime.fromisoformat(text)
    except ValueError as exc:
        raise InvariantViolation(f"invalid timestamp {raw!r}") from exc
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc).replace(microsecond=0)


# ---------------------------------------------------------------------------
# validation

def validate_reading(reading: GlucoseReading) -> GlucoseReading:
    if not (GLUCOSE_MIN_MMOL < reading.value <= GLUCOSE_MAX_MMOL):
        raise InvariantViolation(
            f"glucose value {reading.value} outside (0, {GLUCOSE_MAX_MMOL}] mmol/L"
        )
    _check_timestamp(reading.timestamp)
    return reading


def _check_timestamp(ts: datetime) -> None:
    if ts.tzinfo is None:
        raise InvariantViolation("timestamp must be timezone-aware")
    if ts.microsecond != 0:
        raise InvariantViolation("timestamps carry whole-second precision")


def _validate_meal(p: MealEventPayload) -> None:
    for name in ("carbs", "protein", "fat", "alcohol_units"):
        if getattr(p, name) < 0:
            raise InvariantViolation(f"{name} must be >= 0")
    if p.carbs > MAX_MEAL_CARBS_G:
        raise InvariantViolation(f"carbs {p.carbs} g exceeds sanity bound {MAX_MEAL_CARBS_G} g")
    if not isinstance(p.category, MealCategory):
        raise InvariantViolation(f"unknown meal category {p.category!r}")


def _validate_exercise(p: ExerciseEventPayload) -> None:
    if not p.exercise_type:
        raise InvariantViolation("exercise_type must be non-empty")
    if p.intensity not in (1, 2, 3):
        raise InvariantViolation(f"intensity {p.intensity} not in {{1, 2, 3}}")
    if not (0 < p.duration <= MAX_EXERCISE_MINUTES):
        raise InvariantViolation(
            f"duration {p.duration} min outside (0, {MAX_EXERCISE_MINUTES}]"
        )


def _validate_dose(p: InsulinDosePayload) -> None:
    if p.units < 0:
        raise InvariantViolation("units must be >= 0")
    if p.units > MAX_DOSE_UNITS:
        raise InvariantViolation(f"units {p.units} exceeds sanity bound {MAX_DOSE_UNITS}")
    steps = p.units / DOSE_STEP_UNITS
    if abs(steps - round(steps)) > 1e-9:
        raise InvariantViolation(f"units {p.units} not a multiple of {DOSE_STEP_UNITS} U")
    if not isinstance(p.source, DoseSource):
        raise InvariantViolation(f"unknown dose source {p.source!r}")


_FLAG_FAMILY = {
    HealthFlag.STRESS_ON: ("stress", True),
    HealthFlag.STRESS_OFF: ("stress", False),
    HealthFlag.ILLNESS_ON: ("illness", True),
    HealthFlag.ILLNESS_OFF: ("illness", False),
}


def _validate_flag(p: HealthFlagPayload, log_context: Sequence[DiaryEvent]) -> None:
    if not isinstance(p.flag, HealthFlag):
        raise InvariantViolation(f"unknown health flag {p.flag!r}")
    family, turning_on = _FLAG_FAMILY[p.flag]
    active = False
    for prior in log_context:
        if prior.kind is not EventKind.HEALTH_FLAG:
            continue
        prior_family, prior_on = _FLAG_FAMILY[prior.payload.flag]
        if prior_family == family:
            active = prior_on
    if turning_on == active:
        state = "on" if active else "off"
        raise InvariantViolation(
            f"{family} flag already {state}; on/off flags must alternate"
        )


def validate_event(
    event: DiaryEvent, log_context: Sequence[DiaryEvent] = ()
) -> DiaryEvent:
    """Check all type invariants and temporal ordering against ``log_context``.

    Returns the event unchanged when valid; raises :class:`InvariantViolation`
    naming the broken invariant, or :class:`OutOfOrder` when the timestamp
    precedes the log head.
    """
    if not event.id:
        raise InvariantViolation("event id must be non-empty")
    _check_timestamp(event.timestamp)
    expected = _PAYLOAD_TYPES.get(event.kind)
    if expected is None:
        raise InvariantViolation(f"unknown event kind {event.kind!r}")
    if not isinstance(event.payload, expected):
        raise InvariantViolation(
            f"payload {type(event.payload).__name__} does not match kind {event.kind.value}"
        )

    if event.kind is EventKind.MEAL:
        _validate_meal(event.payload)
    elif event.kind is EventKind.EXERCISE:
        _validate_exercise(event.payload)
    elif event.kind is EventKind.INSULIN_DOSE:
        _validate_dose(event.payload)
    else:
        _validate_flag(event.payload, log_context)

    for prior in log_context:
        if prior.id == event.id:
            raise InvariantViolation(f"duplicate event id {event.id!r}")
    if log_context:
        head = log_context[-1].timestamp
        if event.timestamp < head:
            raise OutOfOrder(
                f"timestamp {format_timestamp(event.timestamp)} precedes log head "
                f"{format_timestamp(head)}"
            )
    return event


def validate_settings(settings: PatientSettings) -> PatientSettings:
    for name in ("ICR", "ISF", "G_target", "DIA"):
        if getattr(settings, name) <= 0:
            raise InvariantViolation(f"{name} must be > 0")
    if not (settings.hypo_threshold < settings.G_target < settings.hyper_threshold):
        raise InvariantViolation(
            "thresholds must satisfy hypo_threshold < G_target < hyper_threshold"
        )
    if settings.alert_low <= 0 or settings.alert_high <= settings.alert_low:
        raise InvariantViolation("alert thresholds must satisfy 0 < alert_low < alert_high")
    return settings


def validate_meal_profile(profile: MealProfile) -> MealProfile:
    if not profile.name:
        raise InvariantViolation("meal profile name must be non-empty")
    if not profile.id:
        raise InvariantViolation("meal profile id must be non-empty")
    for name in ("carbs", "protein", "fat"):
        if getattr(profile, name) < 0:
            raise InvariantViolation(f"{name} must be >= 0")
    if not isinstance(profile.category, MealCategory):
        raise InvariantViolation(f"unknown meal category {profile.category!r}")
    _check_timestamp(profile.created_at)
    return profile


# ---------------------------------------------------------------------------
# meal category defaults

# Local-clock boundaries, half-open [start, end).
_CATEGORY_TABLE = (
    (time(5, 0), time(10, 30), MealCategory.BREAKFAST),
    (time(10, 30), time(15, 0), MealCategory.LUNCH),
    (time(15, 0), time(22, 0), MealCategory.MEAL),
)


def default_meal_category(time_of_day: time) -> MealCategory:
    """Deterministic category for a local clock time; Snack outside main windows."""
    for start, end, category in _CATEGORY_TABLE:
        if start <= time_of_day < end:
            return category
    return MealCategory.SNACK


# ---------------------------------------------------------------------------
# event factories

def new_event_id() -> str:
    return uuid.uuid4().hex


def _prep_timestamp(ts: datetime) -> datetime:
    return ensure_utc(ts).replace(microsecond=0)


def make_meal_event(
    timestamp: datetime,
    carbs: float,
    *,
    protein: float = 0.0,
    fat: float = 0.0,
    alcohol_units: float = 0.0,
    meal_profile_id: Optional[str] = None,
    category: Optional[MealCategory] = None,
    event_id: Optional[str] = None,
) -> DiaryEvent:
    ts = _prep_timestamp(timestamp)
    if category is None:
        category = default_meal_category(ts.time())
    payload = MealEventPayload(
        carbs=carbs, protein=protein, fat=fat, alcohol_units=alcohol_units,
        meal_profile_id=meal_profile_id, category=category,
    )
    return DiaryEvent(event_id or new_event_id(), ts, EventKind.MEAL, payload)


def make_exercise_event(
    timestamp: datetime,
    exercise_type: str,
    intensity: int,
    duration: float,
    *,
    event_id: Optional[str] = None,
) -> DiaryEvent:
    payload = ExerciseEventPayload(exercise_type, intensity, duration)
    return DiaryEvent(
        event_id or new_event_id(), _prep_timestamp(timestamp), EventKind.EXERCISE, payload
    )


def make_dose_event(
    timestamp: datetime,
    units: float,
    source: DoseSource = DoseSource.MANUAL,
    *,
    event_id: Optional[str] = None,
) -> DiaryEvent:
    payload = InsulinDosePayload(units=units, source=source)
    return DiaryEvent(
        event_id or new_event_id(), _prep_timestamp(timestamp), EventKind.INSULIN_DOSE, payload
    )


def make_health_flag_event(
    timestamp: datetime, flag: HealthFlag, *, event_id: Optional[str] = None
) -> DiaryEvent:
    return DiaryEvent(
        event_id or new_event_id(), _prep_timestamp(timestamp),
        EventKind.HEALTH_FLAG, HealthFlagPayload(flag),
    )


# ---------------------------------------------------------------------------
# canonical JSON serialization

def reading_to_dict(reading: GlucoseReading) -> dict:
    return {"timestamp": format_timestamp(reading.timestamp), "value": reading.value}


def reading_from_dict(raw: dict) -> GlucoseReading:
    return GlucoseReading(parse_timestamp(raw["timestamp"]), float(raw["value"]))


def _payload_to_dict(kind: EventKind, payload: EventPayload) -> dict:
    if kind is EventKind.MEAL:
        return {
            "carbs": payload.carbs,
            "protein": payload.protein,
            "fat": payload.fat,
            "alcohol_units": payload.alcohol_units,
            "meal_profile_id": payload.meal_profile_id,
            "category": payload.category.value,
        }
    if kind is EventKind.EXERCISE:
        return {
            "exercise_type": payload.exercise_type,
            "intensity": payload.intensity,
            "duration": payload.duration,
        }
    if kind is EventKind.INSULIN_DOSE:
        return {"units": payload.units, "source": payload.source.value}
    return {"flag": payload.flag.value}


def _payload_from_dict(kind: EventKind, raw: dict) -> EventPayload:
    if kind is EventKind.MEAL:
        return MealEventPayload(
            carbs=float(raw["carbs"]),
            protein=float(raw.get("protein", 0.0)),
            fat=float(raw.get("fat", 0.0)),
            alcohol_units=float(raw.get("alcohol_units", 0.0)),
            meal_profile_id=raw.get("meal_profile_id"),
            category=MealCategory(raw.get("category", "meal")),
        )
    if kind is EventKind.EXERCISE:
        return ExerciseEventPayload(
            exercise_type=raw["exercise_type"],
            intensity=int(raw["intensity"]),
            duration=float(raw["duration"]),
        )
    if kind is EventKind.INSULIN_DOSE:
        return InsulinDosePayload(
            units=float(raw["units"]),
            source=DoseSource(raw.get("source", "manual")),
        )
    return HealthFlagPayload(HealthFlag(raw["flag"]))


def event_to_dict(event: DiaryEvent) -> dict:
    return {
        "id": event.id,
        "timestamp": format_timestamp(event.timestamp),
        "kind": event.kind.value,
        "payload": _payload_to_dict(event.kind, event.payload),
    }


def event_from_dict(raw: dict) -> DiaryEvent:
    try:
        kind = EventKind(raw["kind"])
        return DiaryEvent(
            id=str(raw["id"]),
            timestamp=parse_timestamp(raw["timestamp"]),
            kind=kind,
            payload=_payload_from_dict(kind, raw["payload"]),
        )
    except (KeyError, ValueError, TypeError) as exc:
        if isinstance(exc, InvariantViolation):
            raise
        raise InvariantViolation(f"malformed event record: {exc}") from exc


def event_to_json(event: DiaryEvent) -> str:
    return json.dumps(event_to_dict(event), separators=(",", ":"))


def event_from_json(line: str) -> DiaryEvent:
    try:
        raw = json.loads(line)
    except json.JSONDecodeError as exc:
        raise InvariantViolation(f"malformed event JSON: {exc}") from exc
    return event_from_dict(raw)


def settings_to_dict(settings: PatientSettings) -> dict:
    return {
        "ICR": settings.ICR,
        "ISF": settings.ISF,
        "G_target": settings.G_target,
        "DIA": settings.DIA,
        "hypo_threshold": settings.hypo_threshold,
        "hyper_threshold": settings.hyper_threshold,
        "alert_low": settings.alert_low,
        "alert_high": settings.alert_high,
    }


def settings_from_dict(raw: dict) -> PatientSettings:
    base = settings_to_dict(PatientSettings())
    unknown = set(raw) - set(base)
    if unknown:
        raise InvariantViolation(f"unknown settings fields: {sorted(unknown)}")
    base.update(raw)
    return PatientSettings(**{k: float(v) for k, v in base.items()})


def meal_profile_to_dict(profile: MealProfile) -> dict:
    return {
        "id": profile.id,
        "name": profile.name,
        "carbs": profile.carbs,
        "protein": profile.protein,
        "fat": profile.fat,
        "image_ref": profile.image_ref,
        "category": profile.category.value,
        "created_at": format_timestamp(profile.created_at),
    }


def meal_profile_from_dict(raw: dict) -> MealProfile:
    return MealProfile(
        id=str(raw["id"]),
        name=str(raw["name"]),
        carbs=float(raw["carbs"]),
        protein=float(raw.get("protein", 0.0)),
        fat=float(raw.get("fat", 0.0)),
        image_ref=str(raw.get("image_ref", "")),
        category=MealCategory(raw.get("category", "meal")),
        created_at=parse_timestamp(raw["created_at"]),
    )
