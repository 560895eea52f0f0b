"""Bifocal layout, transforms, snapping and day aggregation."""
from __future__ import annotations

import random
from datetime import date, datetime, timedelta, timezone
from fractions import Fraction

import pytest

from glucoplan.domain import GlucoseReading, make_dose_event, make_meal_event
from glucoplan.timeline import (
    BifocalConfig,
    ConfigInvalid,
    OutOfSpan,
    SegmentKind,
    day_stats,
    default_icon_encoding,
    focal_day_detail,
    geometry_document,
    last_consumed,
    layout,
    snap_target,
    time_to_x,
    x_to_time,
)

FOCAL = date(2026, 8, 7)


def utc(*args) -> datetime:
    return datetime(*args, tzinfo=timezone.utc)


class TestLayout:
    def test_default_partition(self):
        lay = layout(FOCAL)
        assert len(lay.segments) == 9
        focus = [s for s in lay.segments if s.kind is SegmentKind.FOCUS]
        assert len(focus) == 1
        assert focus[0].day == FOCAL
        assert focus[0].x_end - focus[0].x_start == pytest.approx(0.6, abs=1e-12)
        # context width: (1 - 0.6) / (2*4) = 0.05 per day
        for seg in lay.segments:
            if seg.kind is SegmentKind.CONTEXT:
                assert seg.x_end - seg.x_start == pytest.approx(0.05, abs=1e-12)

    def test_tiling_exact(self):
        lay = layout(FOCAL, BifocalConfig(0.7, 3))
        total = sum(s.x_end - s.x_start for s in lay.segments)
        assert abs(total - 1.0) <= 1e-12
        for left, right in zip(lay.segments, lay.segments[1:]):
            assert left.x_end == right.x_start  # shared edges, no gaps/overlaps
            assert left.day + timedelta(days=1) == right.day
        assert lay.segments[0].x_start == 0.0
        assert lay.segments[-1].x_end == 1.0

    def test_focus_fraction_one_invalid(self):
        with pytest.raises(ConfigInvalid):
            layout(FOCAL, BifocalConfig(focus_fraction=1.0))
        with pytest.raises(ConfigInvalid):
            layout(FOCAL, BifocalConfig(focus_fraction=0.0))
        with pytest.raises(ConfigInvalid):
            layout(FOCAL, BifocalConfig(context_days_per_side=0))

    def test_scroll_round_trip_restores_layout(self):
        config = BifocalConfig()
        assert layout(FOCAL + timedelta(days=1), config) != layout(FOCAL, config)
        restored = layout((FOCAL + timedelta(days=1)) - timedelta(days=1), config)
        assert restored == layout(FOCAL, config)


class TestTransforms:
    def test_focal_day_start_maps_to_focus_edge(self):
        lay = layout(FOCAL)
        focus = next(s for s in lay.segments if s.kind is SegmentKind.FOCUS)
        assert time_to_x(lay, utc(2026, 8, 7)) == focus.x_start
        assert time_to_x(lay, utc(2026, 8, 7, 12)) == pytest.approx(
            (focus.x_start + focus.x_end) / 2
        )

    def test_round_trip_under_one_second(self):
        lay = layout(FOCAL)
        rng = random.Random(99)
        span = (lay.span_end - lay.span_start).total_seconds()
        for _ in range(2000):
            t = lay.span_start + timedelta(seconds=rng.uniform(0, span))
            back = x_to_time(lay, time_to_x(lay, t))
            assert abs((back - t).total_seconds()) < 1.0

    def test_strictly_monotone(self):
        lay = layout(FOCAL)
        times = [lay.span_start + timedelta(minutes=30 * k) for k in range(9 * 48 + 1)]
        xs = [time_to_x(lay, t) for t in times]
        assert all(b > a for a, b in zip(xs, xs[1:]))

    def test_out_of_span(self):
        lay = layout(FOCAL)
        with pytest.raises(OutOfSpan):
            time_to_x(lay, lay.span_start - timedelta(seconds=1))
        with pytest.raises(OutOfSpan):
            time_to_x(lay, lay.span_end + timedelta(seconds=1))
        with pytest.raises(OutOfSpan):
            x_to_time(lay, -0.001)
        with pytest.raises(OutOfSpan):
            x_to_time(lay, 1.001)

    def test_span_edges(self):
        lay = layout(FOCAL)
        assert time_to_x(lay, lay.span_start) == 0.0
        assert time_to_x(lay, lay.span_end) == 1.0
        assert x_to_time(lay, 0.0) == lay.span_start
        assert x_to_time(lay, 1.0) == lay.span_end


class TestSnap:
    @pytest.mark.parametrize("offset,expected", [
        (0.0, 0),
        (1.4, 1),
        (1.5, 1),     # ties round toward zero
        (1.6, 2),
        (-0.6, -1),
        (-1.5, -1),
        (-2.51, -3),
        (0.5, 0),
        (-0.5, 0),
    ])
    def test_snap_cases(self, offset, expected):
        assert snap_target(offset) == expected


class TestDayStats:
    def _readings(self, values, day=FOCAL):
        start = datetime.combine(day, datetime.min.time(), tzinfo=timezone.utc)
        return [
            GlucoseReading(start + timedelta(minutes=5 * k), v)
            for k, v in enumerate(values)
        ]

    def test_all_in_band(self):
        stats = day_stats(FOCAL, self._readings([5.0, 6.5, 9.9, 3.9, 10.0]),
                          (3.9, 10.0))
        assert (stats.pct_low, stats.pct_in, stats.pct_high) == (0, 100, 0)
        assert stats.has_data

    def test_counts_match_direct_count(self):
        # 288 readings, exactly 29 below threshold
        values = [3.0] * 29 + [6.0] * (288 - 29)
        stats = day_stats(FOCAL, self._readings(values), (3.9, 10.0))
        assert stats.pct_low == Fraction(29 * 100, 288)
        assert stats.pct_low + stats.pct_in + stats.pct_high == 100

    def test_randomized_days_sum_exactly_100(self):
        rng = random.Random(3)
        for _ in range(50):
            n = rng.randint(1, 288)
            values = [rng.uniform(2.0, 15.0) for _ in range(n)]
            stats = day_stats(FOCAL, self._readings(values), (3.9, 10.0))
            assert stats.pct_low + stats.pct_in + stats.pct_high == 100
            # brute-force counting oracle
            low = sum(1 for v in values if v < 3.9)
            high = sum(1 for v in values if v > 10.0)
            assert stats.pct_low == Fraction(100 * low, n)
            assert stats.pct_high == Fraction(100 * high, n)

    def test_no_data_marker(self):
        stats = day_stats(FOCAL, [], (3.9, 10.0))
        assert not stats.has_data
        assert stats.pct_low == stats.pct_in == stats.pct_high == 0

    def test_icons_include_meal_repeat_markers(self):
        earlier = make_meal_event(utc(2026, 8, 1, 8), 45.0, meal_profile_id="porridge")
        todays = make_meal_event(utc(2026, 8, 7, 8), 45.0, meal_profile_id="porridge")
        stats = day_stats(
            FOCAL, [], (3.9, 10.0),
            events=[todays], event_log=[earlier, todays],
            encode=default_icon_encoding,
        )
        assert len(stats.icons) == 1
        icon = stats.icons[0]
        assert icon.repeat_of == "porridge"
        assert icon.last_consumed == earlier.timestamp
        assert icon.value == pytest.approx(45.0 / 120.0)


class TestLastConsumed:
    def test_never_used(self):
        assert last_consumed("pasta", [], utc(2026, 8, 7)) is None

    def test_most_recent_of_several(self):
        log = [
            make_meal_event(utc(2026, 8, 1, 19), 70.0, meal_profile_id="pasta"),
            make_meal_event(utc(2026, 8, 6, 19), 70.0, meal_profile_id="pasta"),
        ]
        assert last_consumed("pasta", log, utc(2026, 8, 7)) == utc(2026, 8, 6, 19)

    def test_strictly_before(self):
        log = [make_meal_event(utc(2026, 8, 7, 19), 70.0, meal_profile_id="pasta")]
        assert last_consumed("pasta", log, utc(2026, 8, 7, 19)) is None
        assert last_consumed("pasta", log, utc(2026, 8, 7, 19, 0, 1)) is not None


class TestGeometryDocument:
    def test_document_structure(self):
        lay = layout(FOCAL)
        readings = [
            GlucoseReading(utc(2026, 8, 7, 8, 0), 6.1),
            GlucoseReading(utc(2026, 8, 7, 8, 5), 6.3),
        ]
        events = [
            make_meal_event(utc(2026, 8, 7, 8, 0), 45.0, meal_profile_id="porridge"),
            make_dose_event(utc(2026, 8, 7, 8, 0), 4.5),
        ]
        detail = focal_day_detail(FOCAL, readings, events)
        stats = [day_stats(s.day, [], (3.9, 10.0)) for s in lay.segments]
        doc = geometry_document(lay, stats, detail, now=utc(2026, 8, 7, 12))
        assert doc["focal_day"] == "2026-08-07"
        assert len(doc["segments"]) == 9
        assert sum(s["x_end"] - s["x_start"] for s in doc["segments"]) == pytest.approx(1.0)
        assert len(doc["days"]) == 9
        assert len(doc["focus"]["glucose"]) == 2
        assert doc["focus"]["dose_markers"][0]["units"] == 4.5
        assert doc["focus"]["overlay"][0]["carbs"] == 45.0
        assert 0.0 <= doc["now_x"] <= 1.0
        # focus glucose x coordinates sit inside the focus segment
        focus = next(s for s in doc["segments"] if s["kind"] == "focus")
        for pt in doc["focus"]["glucose"]:
            assert focus["x_start"] <= pt["x"] <= focus["x_end"]

    def test_overlay_is_exactly_the_days_meals_and_doses(self):
        events = [
            make_meal_event(utc(2026, 8, 7, 8), 45.0),
            make_meal_event(utc(2026, 8, 7, 13), 60.0),
            make_dose_event(utc(2026, 8, 7, 13), 6.0),
        ]
        detail = focal_day_detail(FOCAL, [], events)
        assert [item.carbs for item in detail.overlay] == [45.0, 60.0]
        assert [units for _, units in detail.dose_markers] == [6.0]
