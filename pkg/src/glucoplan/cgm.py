"""Seeded CGM stream simulator at exact 5-minute cadence.

Values are the deterministic engine trajectory for a scripted scenario plus
seeded Gaussian sensor noise, clipped to the physiologic range, so the same
configuration always yields the identical stream.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timedelta
from typing import Optional, Tuple

import numpy as np

from .domain import DiaryEvent, GLUCOSE_MAX_MMOL, GlucoseReading, ensure_utc
from .engine import (
    ModelParameters,
    SimulationState,
    basal_state,
    inputs_from_events,
    simulate,
)

CGM_CADENCE_MIN = 5.0
GLUCOSE_FLOOR_MMOL = 0.1  # clip noise excursions into the valid range


@dataclass(frozen=True)
class CgmSimulatorConfig:
    seed: int
    noise_sd: float                                # mmol/L
    start: datetime                                # timestamp of the first sample
    start_state: Optional[SimulationState] = None  # defaults to basal for params
    scenario: Tuple[DiaryEvent, ...] = ()
    params: ModelParameters = field(default_factory=ModelParameters)


def simulate_cgm(config: CgmSimulatorConfig, duration_min: float) -> list[GlucoseReading]:
    """Readings every 5 minutes over ``duration_min`` (duration/5 + 1 samples)."""
    if duration_min < 0:
        raise ValueError("duration must be nonnegative")
    if duration_min % CGM_CADENCE_MIN != 0:
        raise ValueError(f"duration must be a multiple of {CGM_CADENCE_MIN:g} min")
    start = ensure_utc(config.start).replace(microsecond=0)
    initial = config.start_state or basal_state(config.params)
    inputs = inputs_from_events(config.scenario, start, duration_min)
    traj = simulate(initial, config.params, inputs, duration_min)

    stride = int(CGM_CADENCE_MIN)  # engine grid is 1 min
    values = traj.G[::stride].copy()
    rng = np.random.default_rng(config.seed)
    values = values + rng.normal(0.0, config.noise_sd, size=values.size)
    values = np.clip(values, GLUCOSE_FLOOR_MMOL, GLUCOSE_MAX_MMOL)

    step = timedelta(minutes=CGM_CADENCE_MIN)
    return [
        GlucoseReading(start + k * step, float(values[k]))
        for k in range(values.size)
    ]
