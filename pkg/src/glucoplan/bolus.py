"""Insulin dose recommendation from carbohydrates, glucose and insulin-on-board.

The advisor is the standard bolus-calculator arithmetic: a meal component of
carbs/ICR, a correction of (G - G_target)/ISF (negative corrections reduce
the meal component but the total never goes below zero), minus linearly
decaying insulin-on-board, rounded half-up to the 0.5 U pen step.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime
from typing import Iterable, Sequence, Tuple

from .domain import DiaryEvent, EventKind, PatientSettings

HALF_UNIT = 0.5


def round_to_half_unit(units: float) -> float:
    """Round to the nearest 0.5 U, ties upward (round half up)."""
    return math.floor(units / HALF_UNIT + 0.5) * HALF_UNIT


def insulin_on_board(
    prior_doses: Iterable[Tuple[float, float]], dia_min: float
) -> float:
    """Remaining active insulin for (units, age-in-minutes) pairs.

    Each dose decays linearly over the duration of insulin action:
    ``units * max(0, 1 - age/DIA)``.
    """
    if dia_min <= 0:
        raise ValueError("DIA must be positive")
    total = 0.0
    for units, age_min in prior_doses:
        if age_min < 0:
            raise ValueError(f"dose age {age_min} min is negative")
        if units < 0:
            raise ValueError(f"dose units {units} is negative")
        total += units * max(0.0, 1.0 - age_min / dia_min)
    return total


def doses_with_ages(
    events: Sequence[DiaryEvent], now: datetime
) -> list[Tuple[float, float]]:
    """(units, age-in-minutes) pairs for all insulin doses up to ``now``."""
    pairs = []
    for event in events:
        if event.kind is not EventKind.INSULIN_DOSE:
            continue
        age_min = (now - event.timestamp).total_seconds() / 60.0
        if age_min >= 0:
            pairs.append((event.payload.units, age_min))
    return pairs


@dataclass(frozen=True)
class BolusBreakdown:
    meal_component: float        # U
    correction_component: float  # U, may be negative
    iob_deduction: float         # U, >= 0
    total: float                 # U, >= 0, multiple of 0.5

    def to_dict(self) -> dict:
        return {
            "meal_component": self.meal_component,
            "correction_component": self.correction_component,
            "iob_deduction": self.iob_deduction,
            "total": self.total,
        }


def recommend(
    carbs: float,
    g_current: float,
    settings: PatientSettings,
    prior_doses: Iterable[Tuple[float, float]] = (),
) -> BolusBreakdown:
    """Recommended bolus for a meal of ``carbs`` grams at glucose ``g_current``."""
    if carbs < 0:
        raise ValueError("carbs must be >= 0")
    if g_current <= 0:
        raise ValueError("current glucose must be positive")
    meal = carbs / settings.ICR
    correction = (g_current - settings.G_target) / settings.ISF
    iob = insulin_on_board(prior_doses, settings.DIA)
    total = max(0.0, round_to_half_unit(meal + correction - iob))
    return BolusBreakdown(
        meal_component=meal,
        correction_component=correction,
        iob_deduction=iob,
        total=total,
    )
