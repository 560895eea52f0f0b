"""What-if exploration, advice rules and diary assembly over the store.

``explore`` is a pure read: it anchors on the latest CGM reading, recommends
a dose for the requested carbs and returns the predicted two-hour trajectory
for either sweep mode.  Committing an exploration is stateless on the server:
the caller echoes the recommendation it saw and the service revalidates by
recomputation before appending the meal (and, if accepted, the dose)
atomically.
"""
from __future__ import annotations

from dataclasses import dataclass
from datetime import date, datetime, timedelta, timezone
from enum import Enum
from typing import Callable, Optional

from . import bolus, engine, timeline
from .domain import (
    DiaryEvent,
    DoseSource,
    InvariantViolation,
    MealCategory,
    PatientSettings,
    default_meal_category,
    format_timestamp,
    make_dose_event,
    make_meal_event,
    parse_timestamp,
)
from .engine import ModelParameters, PredictionResult, StaleData
from .store import EventStore

FLAG_REMINDER_HOURS = 72.0
DEFAULT_EXPLORE_CARBS = 40.0
EXPLORE_CARB_RANGE = (0.0, 120.0)


class ValidationFailure(ValueError):
    """Commit does not match a (re)computed exploration."""


class ExploreMode(str, Enum):
    CARB_SWEEP = "carb_sweep"
    DOSE_SWEEP = "dose_sweep"


class Severity(str, Enum):
    INFO = "info"
    WARNING = "warning"


@dataclass(frozen=True)
class ExploreRequest:
    mode: ExploreMode
    carbs: float
    at: datetime
    dose_override: Optional[float] = None
    meal_category: Optional[MealCategory] = None

    def to_dict(self) -> dict:
        return {
            "mode": self.mode.value,
            "carbs": self.carbs,
            "at": format_timestamp(self.at),
            "dose_override": self.dose_override,
            "meal_category": self.meal_category.value if self.meal_category else None,
        }


@dataclass(frozen=True)
class ExploreResponse:
    prediction: PredictionResult
    recommended: bolus.BolusBreakdown
    request: ExploreRequest

    def to_dict(self) -> dict:
        return {
            "prediction": self.prediction.to_dict(),
            "recommended": self.recommended.to_dict(),
            "request": self.request.to_dict(),
        }


@dataclass(frozen=True)
class AdviceItem:
    severity: Severity
    code: str
    message: str
    linked_time: Optional[datetime] = None

    def to_dict(self) -> dict:
        return {
            "severity": self.severity.value,
            "code": self.code,
            "message": self.message,
            "linked_time": format_timestamp(self.linked_time) if self.linked_time else None,
        }


def _utcnow() -> datetime:
    return datetime.now(timezone.utc).replace(microsecond=0)


class DecisionService:
    """Ties engine, advisor, timeline and store together behind one facade."""

    def __init__(
        self,
        store: EventStore,
        params: Optional[ModelParameters] = None,
        now_fn: Optional[Callable[[], datetime]] = None,
        bifocal_config: timeline.BifocalConfig = timeline.BifocalConfig(),
    ) -> None:
        self.store = store
        self.params = params if params is not None else _params_for(store)
        self.bifocal_config = bifocal_config
        self._now = now_fn or _utcnow

    def now(self) -> datetime:
        return self._now()

    @property
    def settings(self) -> PatientSettings:
        return self.store.get_settings()

    # -- what-if exploration -------------------------------------------------

    def explore(self, request: ExploreRequest) -> ExploreResponse:
        """Pure read: recommendation plus predicted trajectory for a scenario."""
        if request.carbs < 0:
            raise InvariantViolation("carbs must be >= 0")
        if request.mode is ExploreMode.DOSE_SWEEP and request.dose_override is None:
            raise InvariantViolation("dose_override is required for a dose sweep")
        if request.dose_override is not None and request.dose_override < 0:
            raise InvariantViolation("dose_override must be >= 0")

        readings = self.store.readings()
        events = self.store.events()
        settings = self.settings
        if not readings:
            raise StaleData("no CGM readings available")
        latest = readings[-1]

        recommended = bolus.recommend(
            request.carbs,
            latest.value,
            settings,
            bolus.doses_with_ages(events, request.at),
        )
        if request.mode is ExploreMode.DOSE_SWEEP:
            dose = request.dose_override
        else:
            dose = recommended.total
        prediction = engine.predict(
            request.at,
            readings,
            events,
            self.params,
            candidate_carbs=request.carbs,
            candidate_dose=dose,
        )
        return ExploreResponse(prediction=prediction, recommended=recommended,
                               request=request)

    def commit_exploration(
        self,
        request: ExploreRequest,
        accept_dose: bool = True,
        expected_total: Optional[float] = None,
    ) -> list[DiaryEvent]:
        """Record the explored meal (and dose when accepted) in the diary.

        ``expected_total`` must echo the recommendation shown during the
        preceding explore; the service recomputes and rejects a mismatch,
        which also rejects commits that never explored.
        """
        if expected_total is None:
            raise ValidationFailure("commit requires the explored recommendation echo")
        response = self.explore(request)
        dose = (
            request.dose_override
            if request.mode is ExploreMode.DOSE_SWEEP
            else response.recommended.total
        )
        if expected_total != response.recommended.total:
            raise ValidationFailure(
                f"exploration is stale: recommendation is now "
                f"{response.recommended.total} U, commit expected {expected_total} U"
            )
        category = request.meal_category or default_meal_category(request.at.time())
        events = [make_meal_event(request.at, request.carbs, category=category)]
        if accept_dose and dose and dose > 0:
            events.append(make_dose_event(request.at, dose, DoseSource.RECOMMENDED))
        self.store.append_transaction(events)
        return events

    # -- advice ---------------------------------------------------------------

    def advice(self) -> list[AdviceItem]:
        """Deterministic rule table over the current snapshot."""
        now = self.now()
        settings = self.settings
        items: list[AdviceItem] = []

        latest = self.store.latest_reading()
        if latest is not None and latest.value < settings.alert_low:
            items.append(AdviceItem(
                Severity.WARNING, "LowNow",
                f"Current glucose {latest.value:.1f} mmol/L is below the low alert "
                f"({settings.alert_low:g} mmol/L)",
                latest.timestamp,
            ))

        try:
            prediction = engine.predict(
                now, self.store.readings(), self.store.events(), self.params
            )
        except StaleData:
            prediction = None
        if prediction is not None:
            items.extend(_threshold_crossings(prediction, settings))

        for family, start, end in engine.stress_windows_from_events(self.store.events()):
            if end is not None:
                continue
            hours_on = (now - start).total_seconds() / 3600.0
            if hours_on > FLAG_REMINDER_HOURS:
                items.append(AdviceItem(
                    Severity.INFO, "FlagReminder",
                    f"The {family} flag has been on for {hours_on:.0f} hours; "
                    f"switch it off after recovery",
                    start,
                ))
        return items

    # -- diary ------------------------------------------------------------------

    def diary_geometry(self, focal_day: Optional[date] = None) -> dict:
        now = self.now()
        if focal_day is None:
            focal_day = now.date()
        layout = timeline.layout(focal_day, self.bifocal_config)
        settings = self.settings
        thresholds = (settings.hypo_threshold, settings.hyper_threshold)
        full_log = self.store.events()

        stats = []
        for seg in layout.segments:
            day_start = datetime.combine(seg.day, datetime.min.time(), tzinfo=timezone.utc)
            day_end = day_start + timedelta(days=1)
            stats.append(timeline.day_stats(
                seg.day,
                self.store.readings(day_start, day_end),
                thresholds,
                events=self.store.query(day_start, day_end),
                event_log=full_log,
                encode=timeline.default_icon_encoding,
            ))

        detail = self._focal_detail(focal_day, now)
        return timeline.geometry_document(layout, stats, detail, now)

    def day_detail(self, day: date) -> dict:
        return timeline.detail_to_dict(self._focal_detail(day, self.now()))

    def _focal_detail(self, day: date, now: datetime) -> timeline.FocalDayDetail:
        day_start = datetime.combine(day, datetime.min.time(), tzinfo=timezone.utc)
        day_end = day_start + timedelta(days=1)
        prediction = None
        if day == now.date():
            try:
                prediction = engine.predict(
                    now, self.store.readings(), self.store.events(), self.params
                )
            except StaleData:
                prediction = None
        return timeline.focal_day_detail(
            day,
            self.store.readings(day_start, day_end),
            self.store.query(day_start, day_end),
            self.store.meal_profiles(),
            prediction,
        )


def _params_for(store: EventStore) -> ModelParameters:
    path = store.data_dir / "params.json"
    if path.exists():
        return engine.load_parameters(path)
    return ModelParameters()


def _threshold_crossings(
    prediction: PredictionResult, settings: PatientSettings
) -> list[AdviceItem]:
    items = []
    low_at = high_at = None
    for k, value in enumerate(prediction.points):
        t = prediction.start_time + timedelta(minutes=k * prediction.step)
        if low_at is None and value < settings.alert_low:
            low_at = t
        if high_at is None and value > settings.alert_high:
            high_at = t
    if low_at is not None:
        items.append(AdviceItem(
            Severity.WARNING, "PredictedHypo",
            f"Predicted glucose falls below {settings.alert_low:g} mmol/L "
            f"within the prediction horizon",
            low_at,
        ))
    if high_at is not None:
        items.append(AdviceItem(
            Severity.WARNING, "PredictedHyper",
            f"Predicted glucose rises above {settings.alert_high:g} mmol/L "
            f"within the prediction horizon",
            high_at,
        ))
    return items


# ---------------------------------------------------------------------------
# request parsing helpers shared by the HTTP surface and CLI

def explore_request_from_dict(raw: dict, default_at: datetime) -> ExploreRequest:
    try:
        mode = ExploreMode(raw.get("mode", "carb_sweep"))
    except ValueError as exc:
        raise InvariantViolation(f"unknown explore mode {raw.get('mode')!r}") from exc
    at = parse_timestamp(raw["at"]) if "at" in raw and raw["at"] else default_at
    category = None
    if raw.get("meal_category"):
        try:
            category = MealCategory(raw["meal_category"])
        except ValueError as exc:
            raise InvariantViolation(
                f"unknown meal category {raw['meal_category']!r}"
            ) from exc
    dose_override = raw.get("dose_override")
    return ExploreRequest(
        mode=mode,
        carbs=float(raw.get("carbs", DEFAULT_EXPLORE_CARBS)),
        at=at,
        dose_override=float(dose_override) if dose_override is not None else None,
        meal_category=category,
    )
