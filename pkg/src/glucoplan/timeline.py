"""Bifocal time-to-screen distortion, day snapping and diary content assembly.

The diary shows one focal day at full resolution flanked by compressed
context days (classic two-slope bifocal geometry): the focal day takes
``focus_fraction`` of the width and every context day an equal share of the
rest.  The time-to-x map is piecewise linear, continuous and strictly
increasing, so times and screen positions convert both ways losslessly.
Per-day content is aggregated here as well: time-in-band percentage bars,
event icons with optional vertical encoding, and the focal-day detail of
glucose curve, dose markers and meal overlay.
"""
from __future__ import annotations

from dataclasses import dataclass
from datetime import date, datetime, time, timedelta, timezone
from enum import Enum
from fractions import Fraction
from typing import Callable, Optional, Sequence, Tuple

from .domain import (
    DiaryEvent,
    EventKind,
    GlucoseReading,
    MealProfile,
    PatientSettings,
    format_timestamp,
)
from .engine import PredictionResult

SECONDS_PER_DAY = 86400.0


class ConfigInvalid(ValueError):
    """Bifocal configuration cannot produce a valid layout."""


class OutOfSpan(ValueError):
    """Time or x coordinate lies outside the visible span."""


class SegmentKind(str, Enum):
    CONTEXT = "context"
    FOCUS = "focus"


@dataclass(frozen=True)
class BifocalConfig:
    focus_fraction: float = 0.6
    context_days_per_side: int = 4
    width: float = 1.0


def validate_config(config: BifocalConfig) -> BifocalConfig:
    if not (0.0 < config.focus_fraction < 1.0):
        raise ConfigInvalid(
            f"focus_fraction {config.focus_fraction} leaves no context width"
        )
    if config.context_days_per_side < 1:
        raise ConfigInvalid("context_days_per_side must be >= 1")
    if config.width <= 0:
        raise ConfigInvalid("width must be positive")
    return config


@dataclass(frozen=True)
class Segment:
    day: date
    x_start: float
    x_end: float
    kind: SegmentKind


@dataclass(frozen=True)
class BifocalLayout:
    focal_day: date
    segments: Tuple[Segment, ...]

    @property
    def span_start(self) -> datetime:
        return _day_start(self.segments[0].day)

    @property
    def span_end(self) -> datetime:
        return _day_start(self.segments[-1].day) + timedelta(days=1)


def _day_start(day: date) -> datetime:
    return datetime.combine(day, time.min, tzinfo=timezone.utc)


def layout(focal_day: date, config: BifocalConfig = BifocalConfig()) -> BifocalLayout:
    """Partition the width into context/focus/context segments around ``focal_day``."""
    validate_config(config)
    n = config.context_days_per_side
    focus_w = config.focus_fraction * config.width
    context_w = (config.width - focus_w) / (2 * n)
    segments = []
    x = 0.0
    for offset in range(-n, n + 1):
        day = focal_day + timedelta(days=offset)
        if offset == 0:
            seg_w, kind = focus_w, SegmentKind.FOCUS
        else:
            seg_w, kind = context_w, SegmentKind.CONTEXT
        x_end = x + seg_w
        segments.append(Segment(day, x, x_end, kind))
        x = x_end
    # Pin the last edge to the exact width so the tiling closes despite
    # accumulated rounding.
    last = segments[-1]
    segments[-1] = Segment(last.day, last.x_start, config.width, last.kind)
    return BifocalLayout(focal_day=focal_day, segments=tuple(segments))


def time_to_x(layout_: BifocalLayout, t: datetime) -> float:
    """Screen coordinate of an absolute time; linear within each day segment."""
    if t < layout_.span_start or t > layout_.span_end:
        raise OutOfSpan(f"{format_timestamp(t)} outside visible span")
    if t == layout_.span_end:
        return layout_.segments[-1].x_end
    day = t.astimezone(timezone.utc).date()
    for seg in layout_.segments:
        if seg.day == day:
            frac = (t - _day_start(day)).total_seconds() / SECONDS_PER_DAY
            return seg.x_start + frac * (seg.x_end - seg.x_start)
    raise OutOfSpan(f"{format_timestamp(t)} outside visible span")


def x_to_time(layout_: BifocalLayout, x: float) -> datetime:
    """Inverse of :func:`time_to_x` over the visible span."""
    first, last = layout_.segments[0], layout_.segments[-1]
    if x < first.x_start or x > last.x_end:
        raise OutOfSpan(f"x={x} outside [{first.x_start}, {last.x_end}]")
    for seg in layout_.segments:
        if x <= seg.x_end or seg is last:
            frac = (x - seg.x_start) / (seg.x_end - seg.x_start)
            return _day_start(seg.day) + timedelta(seconds=frac * SECONDS_PER_DAY)
    raise OutOfSpan(f"x={x} outside visible span")  # pragma: no cover


def snap_target(current_scroll_day_offset: float) -> int:
    """Nearest whole-day offset for scroll snapping; ties round toward zero."""
    magnitude = abs(current_scroll_day_offset)
    whole = int(magnitude)
    if magnitude - whole > 0.5:
        whole += 1
    return whole if current_scroll_day_offset >= 0 else -whole


# ---------------------------------------------------------------------------
# per-day content

@dataclass(frozen=True)
class DayIcon:
    kind: EventKind
    value: Optional[float]            # vertical encoding in [0, 1], UI-assigned
    at: datetime
    repeat_of: Optional[str] = None   # meal profile id, when the meal repeats one
    last_consumed: Optional[datetime] = None


@dataclass(frozen=True)
class DayStats:
    """Share of the day spent low/in/high plus qualitative event icons.

    Percentages are exact rationals over the day's sample count; they sum to
    100 whenever the day has data.
    """
    date: date
    pct_low: Fraction
    pct_in: Fraction
    pct_high: Fraction
    has_data: bool
    icons: Tuple[DayIcon, ...] = ()


def last_consumed(
    meal_profile_id: str,
    event_log: Sequence[DiaryEvent],
    before: datetime,
) -> Optional[datetime]:
    """Most recent meal event referencing the profile strictly before ``before``."""
    latest = None
    for event in event_log:
        if event.kind is not EventKind.MEAL:
            continue
        if event.payload.meal_profile_id != meal_profile_id:
            continue
        if event.timestamp >= before:
            continue
        if latest is None or event.timestamp > latest:
            latest = event.timestamp
    return latest


def day_stats(
    day: date,
    readings: Sequence[GlucoseReading],
    thresholds: Tuple[float, float],
    events: Sequence[DiaryEvent] = (),
    event_log: Sequence[DiaryEvent] = (),
    encode: Optional[Callable[[DiaryEvent], Optional[float]]] = None,
) -> DayStats:
    """Aggregate one day of readings into band percentages and event icons.

    ``thresholds`` is (hypo, hyper) in mmol/L.  ``events`` are the day's own
    events; ``event_log`` is the full history used to mark repeated meals via
    :func:`last_consumed`.  ``encode`` optionally maps an event to its icon's
    vertical position.
    """
    hypo, hyper = thresholds
    n_low = n_in = n_high = 0
    for reading in readings:
        if reading.value < hypo:
            n_low += 1
        elif reading.value > hyper:
            n_high += 1
        else:
            n_in += 1
    total = n_low + n_in + n_high
    if total:
        pct_low = Fraction(100 * n_low, total)
        pct_in = Fraction(100 * n_in, total)
        pct_high = Fraction(100 * n_high, total)
    else:
        pct_low = pct_in = pct_high = Fraction(0)

    icons = []
    for event in events:
        value = encode(event) if encode is not None else None
        repeat_of = None
        last_at = None
        if event.kind is EventKind.MEAL and event.payload.meal_profile_id:
            repeat_of = event.payload.meal_profile_id
            last_at = last_consumed(repeat_of, event_log, event.timestamp)
        icons.append(DayIcon(event.kind, value, event.timestamp, repeat_of, last_at))

    return DayStats(
        date=day,
        pct_low=pct_low,
        pct_in=pct_in,
        pct_high=pct_high,
        has_data=total > 0,
        icons=tuple(icons),
    )


@dataclass(frozen=True)
class MealOverlayItem:
    at: datetime
    carbs: float
    meal_profile_id: Optional[str]
    image_ref: Optional[str]


@dataclass(frozen=True)
class FocalDayDetail:
    """Everything the focus region draws for one day."""
    date: date
    glucose_series: Tuple[GlucoseReading, ...]
    prediction: Optional[PredictionResult]
    dose_markers: Tuple[Tuple[datetime, float], ...]
    overlay: Tuple[MealOverlayItem, ...]


def focal_day_detail(
    day: date,
    readings: Sequence[GlucoseReading],
    events: Sequence[DiaryEvent],
    profiles: Sequence[MealProfile] = (),
    prediction: Optional[PredictionResult] = None,
) -> FocalDayDetail:
    by_id = {p.id: p for p in profiles}
    doses = []
    overlay = []
    for event in events:
        if event.kind is EventKind.INSULIN_DOSE:
            doses.append((event.timestamp, event.payload.units))
        elif event.kind is EventKind.MEAL:
            profile = by_id.get(event.payload.meal_profile_id or "")
            overlay.append(MealOverlayItem(
                at=event.timestamp,
                carbs=event.payload.carbs,
                meal_profile_id=event.payload.meal_profile_id,
                image_ref=profile.image_ref if profile else None,
            ))
    return FocalDayDetail(
        date=day,
        glucose_series=tuple(readings),
        prediction=prediction,
        dose_markers=tuple(doses),
        overlay=tuple(overlay),
    )


# ---------------------------------------------------------------------------
# geometry document (JSON payload for the companion UI)

def _icon_to_dict(icon: DayIcon) -> dict:
    return {
        "kind": icon.kind.value,
        "value": icon.value,
        "at": format_timestamp(icon.at),
        "repeat_of": icon.repeat_of,
        "last_consumed": (
            format_timestamp(icon.last_consumed) if icon.last_consumed else None
        ),
    }


def _stats_to_dict(stats: DayStats) -> dict:
    return {
        "date": stats.date.isoformat(),
        "pct_low": float(stats.pct_low),
        "pct_in": float(stats.pct_in),
        "pct_high": float(stats.pct_high),
        "has_data": stats.has_data,
        "icons": [_icon_to_dict(icon) for icon in stats.icons],
    }


def default_icon_encoding(event: DiaryEvent) -> Optional[float]:
    """Reasonable default vertical encoding; callers may substitute their own."""
    if event.kind is EventKind.MEAL:
        return min(event.payload.carbs / 120.0, 1.0)
    if event.kind is EventKind.EXERCISE:
        return event.payload.intensity / 3.0
    if event.kind is EventKind.INSULIN_DOSE:
        return min(event.payload.units / 10.0, 1.0)
    return 1.0


def detail_to_dict(
    detail: FocalDayDetail, layout_: Optional[BifocalLayout] = None
) -> dict:
    """Serialize focal-day content; x coordinates included when a layout is given."""
    def x_of(t: datetime) -> Optional[float]:
        if layout_ is None:
            return None
        return time_to_x(layout_, t)

    polyline = [
        {"x": x_of(r.timestamp), "t": format_timestamp(r.timestamp),
         "glucose": r.value}
        for r in detail.glucose_series
    ]
    doses = [
        {"x": x_of(at), "t": format_timestamp(at), "units": units}
        for at, units in detail.dose_markers
    ]
    overlay = [
        {"x": x_of(item.at), "t": format_timestamp(item.at),
         "carbs": item.carbs, "meal_profile_id": item.meal_profile_id,
         "image_ref": item.image_ref}
        for item in detail.overlay
    ]
    prediction = None
    if detail.prediction is not None:
        pred = detail.prediction
        prediction = pred.to_dict()
        if layout_ is not None:
            xs = []
            for k in range(len(pred.points)):
                t = pred.start_time + timedelta(minutes=k * pred.step)
                xs.append(time_to_x(layout_, t) if t <= layout_.span_end else None)
            prediction["x"] = xs
    return {
        "date": detail.date.isoformat(),
        "glucose": polyline,
        "dose_markers": doses,
        "overlay": overlay,
        "prediction": prediction,
    }


def geometry_document(
    layout_: BifocalLayout,
    day_stats_list: Sequence[DayStats],
    focal_detail: FocalDayDetail,
    now: Optional[datetime] = None,
) -> dict:
    """Assemble the full diary geometry consumed by the UI."""
    doc = {
        "focal_day": layout_.focal_day.isoformat(),
        "segments": [
            {"day": seg.day.isoformat(), "x_start": seg.x_start,
             "x_end": seg.x_end, "kind": seg.kind.value}
            for seg in layout_.segments
        ],
        "days": [_stats_to_dict(s) for s in day_stats_list],
        "focus": detail_to_dict(focal_detail, layout_),
        "now": None,
        "now_x": None,
    }
    if now is not None:
        doc["now"] = format_timestamp(now)
        if layout_.span_start <= now <= layout_.span_end:
            doc["now_x"] = time_to_x(layout_, now)
    return doc
