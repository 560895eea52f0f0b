"""Shared fixtures: fixed clocks, quiescent stores and seeded demo data."""
from __future__ import annotations

from datetime import datetime, timedelta, timezone

import pytest

from glucoplan.domain import GlucoseReading, PatientSettings
from glucoplan.engine import ModelParameters
from glucoplan.service import DecisionService
from glucoplan.store import EventStore

ANCHOR = datetime(2026, 8, 7, 12, 0, 0, tzinfo=timezone.utc)


@pytest.fixture
def anchor() -> datetime:
    return ANCHOR


@pytest.fixture
def params() -> ModelParameters:
    return ModelParameters()


@pytest.fixture
def settings() -> PatientSettings:
    return PatientSettings()


def flat_readings(
    value: float = 6.5,
    end: datetime = ANCHOR,
    hours: float = 12.0,
    step_min: float = 5.0,
) -> list[GlucoseReading]:
    """A constant CGM stream ending exactly at ``end``."""
    n = int(hours * 60 / step_min)
    step = timedelta(minutes=step_min)
    start = end - n * step
    return [GlucoseReading(start + k * step, value) for k in range(n + 1)]


@pytest.fixture
def quiescent_store(tmp_path) -> EventStore:
    """A store holding a flat 6.5 mmol/L stream and no events."""
    store = EventStore(tmp_path / "quiescent")
    store.ingest_readings(flat_readings())
    return store


@pytest.fixture
def quiescent_service(quiescent_store) -> DecisionService:
    return DecisionService(quiescent_store, now_fn=lambda: ANCHOR)
