"""Seeded demo diary: a realistic multi-day history for demos and tests.

Generates meal/dose/exercise/health-flag events on a daily rhythm with
seeded jitter, runs the CGM simulator over the full span, and populates a
store directory.  The same (seed, days, anchor) triple always produces the
identical data set, byte for byte.
"""
from __future__ import annotations

from datetime import datetime, timedelta, timezone
from typing import Optional

import numpy as np

from .bolus import round_to_half_unit
from .cgm import CgmSimulatorConfig, simulate_cgm
from .domain import (
    DiaryEvent,
    DoseSource,
    HealthFlag,
    MealCategory,
    MealProfile,
    PatientSettings,
    make_dose_event,
    make_exercise_event,
    make_health_flag_event,
    make_meal_event,
)
from .engine import ModelParameters, parameters_to_dict
from .store import EventStore, _write_json_atomic

DEMO_NOISE_SD = 0.25  # mmol/L sensor noise

_PROFILE_SPECS = (
    ("porridge-berries", "Porridge with berries", 45.0, 10.0, 6.0, MealCategory.BREAKFAST),
    ("eggs-toast", "Eggs on toast", 30.0, 18.0, 14.0, MealCategory.BREAKFAST),
    ("chicken-sandwich", "Chicken sandwich", 50.0, 25.0, 12.0, MealCategory.LUNCH),
    ("lentil-soup", "Lentil soup and bread", 40.0, 14.0, 7.0, MealCategory.LUNCH),
    ("salmon-rice", "Salmon with rice", 60.0, 30.0, 15.0, MealCategory.MEAL),
    ("veg-pasta", "Vegetable pasta", 70.0, 16.0, 11.0, MealCategory.MEAL),
    ("apple-snack", "Apple and nuts", 20.0, 3.0, 8.0, MealCategory.SNACK),
)

_EXERCISE_CHOICES = ("walking", "running", "cycling", "swimming")


def demo_anchor(now: Optional[datetime] = None) -> datetime:
    """Anchor 'now' on the CGM grid: UTC, whole minutes, multiple of 5."""
    if now is None:
        now = datetime.now(timezone.utc)
    now = now.astimezone(timezone.utc).replace(second=0, microsecond=0)
    return now - timedelta(minutes=now.minute % 5)


def seed_demo(
    data_dir,
    days: int = 7,
    seed: int = 42,
    now: Optional[datetime] = None,
    scenario: Optional[list[DiaryEvent]] = None,
) -> EventStore:
    """Populate ``data_dir`` with a seeded demo history ending at ``now``.

    When ``scenario`` is given it replaces the generated events (timestamps
    must be in order); readings are still simulated from it.
    """
    if days < 1:
        raise ValueError("days must be >= 1")
    anchor = demo_anchor(now)
    start = anchor - timedelta(days=days)
    rng = np.random.default_rng(seed)
    settings = PatientSettings()
    params = ModelParameters()

    profiles = [
        MealProfile(
            id=pid, name=name, carbs=carbs, protein=protein, fat=fat,
            image_ref=f"images/{pid}.jpg", category=category, created_at=start,
        )
        for pid, name, carbs, protein, fat, category in _PROFILE_SPECS
    ]

    events = scenario if scenario is not None else _scripted_events(
        rng, start, anchor, days, profiles, settings
    )

    readings = simulate_cgm(
        CgmSimulatorConfig(
            seed=seed,
            noise_sd=DEMO_NOISE_SD,
            start=start,
            scenario=tuple(events),
            params=params,
        ),
        duration_min=days * 24 * 60,
    )

    store = EventStore(data_dir)
    store.put_settings(settings)
    for profile in profiles:
        store.add_meal_profile(profile)
    for event in events:
        if event.timestamp <= anchor:
            store.append(event)
    store.ingest_readings(readings)
    _write_json_atomic(store.data_dir / "params.json", parameters_to_dict(params))
    return store


def _jitter_minutes(rng: np.random.Generator, spread_min: int) -> timedelta:
    # Whole-minute jitter keeps every timestamp on the engine grid.
    return timedelta(minutes=int(rng.integers(-spread_min, spread_min + 1)))


def _scripted_events(rng, start, anchor, days, profiles, settings):
    by_category = {}
    for profile in profiles:
        by_category.setdefault(profile.category, []).append(profile)
    counter = 0

    def next_id() -> str:
        nonlocal counter
        counter += 1
        return f"demo-{counter:05d}"

    events: list[DiaryEvent] = []

    def add_meal_with_dose(at, category, *, dose_scale=1.0, bolus=True):
        nonlocal events
        choices = by_category[category]
        profile = choices[int(rng.integers(0, len(choices)))]
        carbs = float(np.round(profile.carbs * rng.uniform(0.8, 1.2)))
        events.append(make_meal_event(
            at, carbs, protein=profile.protein, fat=profile.fat,
            meal_profile_id=profile.id, category=category, event_id=next_id(),
        ))
        if bolus:
            units = round_to_half_unit(carbs / settings.ICR * dose_scale)
            if units > 0:
                events.append(make_dose_event(
                    at, units, DoseSource.RECOMMENDED, event_id=next_id(),
                ))

    for day in range(days):
        midnight = start + timedelta(days=day)
        add_meal_with_dose(
            midnight + timedelta(hours=7, minutes=30) + _jitter_minutes(rng, 40),
            MealCategory.BREAKFAST,
            dose_scale=float(rng.uniform(0.85, 1.15)),
        )
        add_meal_with_dose(
            midnight + timedelta(hours=12, minutes=30) + _jitter_minutes(rng, 50),
            MealCategory.LUNCH,
            dose_scale=float(rng.uniform(0.85, 1.15)),
        )
        add_meal_with_dose(
            midnight + timedelta(hours=18, minutes=45) + _jitter_minutes(rng, 50),
            MealCategory.MEAL,
            dose_scale=float(rng.uniform(0.8, 1.1)),
        )
        if rng.uniform() < 0.5:  # undosed afternoon snack drives excursions
            add_meal_with_dose(
                midnight + timedelta(hours=15, minutes=45) + _jitter_minutes(rng, 30),
                MealCategory.SNACK,
                bolus=False,
            )
        if rng.uniform() < 0.45:
            events.append(make_exercise_event(
                midnight + timedelta(hours=17) + _jitter_minutes(rng, 45),
                _EXERCISE_CHOICES[int(rng.integers(0, len(_EXERCISE_CHOICES)))],
                intensity=int(rng.integers(1, 4)),
                duration=float(int(rng.integers(20, 61))),
                event_id=next_id(),
            ))

    if days >= 4:  # one stress episode mid-history
        stress_on = start + timedelta(days=days // 2, hours=9)
        events.append(make_health_flag_event(
            stress_on, HealthFlag.STRESS_ON, event_id=next_id()))
        stress_off = stress_on + timedelta(hours=30)
        if stress_off <= anchor:
            events.append(make_health_flag_event(
                stress_off, HealthFlag.STRESS_OFF, event_id=next_id()))

    events.sort(key=lambda e: (e.timestamp, e.id))
    return events
