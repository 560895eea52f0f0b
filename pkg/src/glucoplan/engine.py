"""Deterministic glucose simulator and two-hour prediction.

The dynamics are a Bergman-style minimal model driven by two-compartment
meal and subcutaneous-insulin absorption chains, integrated with classical
fixed-step fourth-order Runge-Kutta:

    dD1/dt = -D1/t_maxG                   (+ Bio * carbs at meal times)
    dD2/dt = (D1 - D2)/t_maxG             Ra = D2/t_maxG          [g/min]
    dS1/dt = -S1/t_maxI                   (+ units at bolus times)
    dS2/dt = (S1 - S2)/t_maxI             U  = S2/t_maxI          [U/min]
    dI/dt  = U * 1000/(V_I * BW) - k_e * (I - I_b)                [mU/L/min]
    dX/dt  = -p2 * X + p3 * (I - I_b)                             [1/min]
    dG/dt  = -(p1*s + X + e)*G + p1*s*G_b + Ra * MMOL_PER_G/(V_G * BW)

where e is the exercise clearance (alpha_ex * intensity during a bout, half
gain for a 60-minute tail after it) and s the stress multiplier while a
stress or illness flag is active.  Carbohydrate mass converts to glucose
moles via MMOL_PER_G; insulin units convert to plasma mU/L at the S2 outflow.
State trajectories are bit-identical for identical inputs.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from datetime import datetime, timedelta
from typing import Optional, Sequence, Union

import numpy as np

from .domain import (
    DiaryEvent,
    EventKind,
    GlucoseReading,
    HealthFlag,
)

MMOL_PER_G = 1000.0 / 180.16   # glucose molar mass 180.16 g/mol

EXERCISE_TAIL_MIN = 60.0       # post-bout clearance tail, half gain

PREDICTION_HORIZON_MIN = 120.0
PREDICTION_STEP_MIN = 5.0
INTERNAL_DT_MIN = 1.0
REPLAY_WINDOW_MIN = 480.0      # history replayed to reconstruct compartments
MAX_READING_AGE_MIN = 15.0


class NonFiniteState(RuntimeError):
    """Integration produced NaN/Inf; signals parameter pathology."""


class StaleData(RuntimeError):
    """No sufficiently recent CGM reading to anchor a prediction."""


@dataclass(frozen=True)
class ModelParameters:
    """Physiological constants; defaults are literature-typical adult values
    balanced so that covering 40 g of carbohydrate with 4 U of insulin keeps
    the trajectory near basal."""
    p1: float = 0.02          # glucose effectiveness, 1/min
    p2: float = 0.028         # remote-insulin decay, 1/min
    p3: float = 1.2e-5        # insulin action gain, 1/min per (mU/L)
    G_b: float = 6.5          # basal glucose, mmol/L
    I_b: float = 10.0         # basal plasma insulin, mU/L
    k_e: float = 0.14         # insulin elimination, 1/min
    t_maxG: float = 40.0      # meal absorption time constant, min
    t_maxI: float = 55.0      # insulin absorption time constant, min
    V_G: float = 0.16         # glucose distribution volume, L/kg
    V_I: float = 0.12         # insulin distribution volume, L/kg
    BW: float = 70.0          # body weight, kg
    Bio: float = 0.8          # carbohydrate bioavailability, (0, 1]
    alpha_ex: float = 0.005   # exercise clearance gain per intensity level, 1/min
    stress_factor: float = 1.3  # multiplier while stress/illness active
    sigma0: float = 0.3       # confidence-band scale, mmol/L
    z: float = 1.96           # band half-width multiplier


def validate_parameters(params: ModelParameters) -> ModelParameters:
    positive = (
        "p1", "p2", "p3", "G_b", "I_b", "k_e", "t_maxG", "t_maxI",
        "V_G", "V_I", "BW", "sigma0",
    )
    for name in positive:
        if getattr(params, name) <= 0:
            raise ValueError(f"{name} must be strictly positive")
    if not (0 < params.Bio <= 1):
        raise ValueError("Bio must lie in (0, 1]")
    if params.alpha_ex < 0 or params.z < 0:
        raise ValueError("alpha_ex and z must be nonnegative")
    if params.stress_factor < 1:
        raise ValueError("stress_factor must be >= 1")
    return params


def parameters_to_dict(params: ModelParameters) -> dict:
    return {
        "p1": params.p1, "p2": params.p2, "p3": params.p3,
        "G_b": params.G_b, "I_b": params.I_b, "k_e": params.k_e,
        "t_maxG": params.t_maxG, "t_maxI": params.t_maxI,
        "V_G": params.V_G, "V_I": params.V_I, "BW": params.BW,
        "Bio": params.Bio, "alpha_ex": params.alpha_ex,
        "stress_factor": params.stress_factor,
        "sigma0": params.sigma0, "z": params.z,
    }


def parameters_from_dict(raw: dict) -> ModelParameters:
    base = parameters_to_dict(ModelParameters())
    unknown = set(raw) - set(base)
    if unknown:
        raise ValueError(f"unknown parameter fields: {sorted(unknown)}")
    base.update(raw)
    return validate_parameters(ModelParameters(**{k: float(v) for k, v in base.items()}))


def load_parameters(path) -> ModelParameters:
    with open(path, encoding="utf-8") as fh:
        return parameters_from_dict(json.load(fh))


@dataclass(frozen=True)
class SimulationState:
    """Instantaneous model state."""
    G: float          # plasma glucose, mmol/L
    X: float = 0.0    # remote insulin action, 1/min
    I: float = 0.0    # plasma insulin, mU/L
    D1: float = 0.0   # meal absorption compartments, g
    D2: float = 0.0
    S1: float = 0.0   # subcutaneous insulin compartments, U
    S2: float = 0.0


def basal_state(params: ModelParameters) -> SimulationState:
    return SimulationState(G=params.G_b, I=params.I_b)


# ---------------------------------------------------------------------------
# engine inputs

@dataclass(frozen=True)
class CarbIntake:
    at_min: float
    carbs: float      # g


@dataclass(frozen=True)
class InsulinBolus:
    at_min: float
    units: float      # U


@dataclass(frozen=True)
class ExerciseBout:
    start_min: float
    duration_min: float
    intensity: int    # 1..3


@dataclass(frozen=True)
class StressWindow:
    start_min: float
    end_min: float    # math.inf for an open window


EngineInput = Union[CarbIntake, InsulinBolus, ExerciseBout, StressWindow]


STATE_COLUMNS = ("G", "X", "I", "D1", "D2", "S1", "S2")


@dataclass(frozen=True)
class Trajectory:
    """Dense state trajectory on a fixed time grid (minutes from start)."""
    times_min: np.ndarray
    states: np.ndarray   # shape (n_points, 7), columns per STATE_COLUMNS

    @property
    def G(self) -> np.ndarray:
        return self.states[:, 0]

    def final_state(self) -> SimulationState:
        return SimulationState(*(float(v) for v in self.states[-1]))

    def at_index(self, i: int) -> SimulationState:
        return SimulationState(*(float(v) for v in self.states[i]))


def _exercise_rate(t: float, bouts: Sequence[ExerciseBout], alpha_ex: float) -> float:
    rate = 0.0
    for b in bouts:
        end = b.start_min + b.duration_min
        if b.start_min <= t < end:
            rate += alpha_ex * b.intensity
        elif end <= t < end + EXERCISE_TAIL_MIN:
            rate += 0.5 * alpha_ex * b.intensity
    return rate


def _stress_multiplier(t: float, windows: Sequence[StressWindow], factor: float) -> float:
    for w in windows:
        if w.start_min <= t < w.end_min:
            return factor
    return 1.0


def simulate(
    initial: SimulationState,
    params: ModelParameters,
    inputs: Sequence[EngineInput],
    horizon_min: float,
    dt_min: float = INTERNAL_DT_MIN,
) -> Trajectory:
    """Integrate the model for ``horizon_min`` minutes at fixed step ``dt_min``.

    ``dt_min`` must divide the horizon.  Carb and bolus inputs are applied as
    impulses at the nearest grid point; exercise and stress act through the
    clearance term over their windows.  Raises :class:`NonFiniteState` if the
    integration blows up.
    """
    if dt_min <= 0:
        raise ValueError("dt_min must be positive")
    n_steps = int(round(horizon_min / dt_min))
    if abs(n_steps * dt_min - horizon_min) > 1e-9:
        raise ValueError(f"dt {dt_min} min does not divide horizon {horizon_min} min")
    if initial.G <= 0:
        raise ValueError("initial glucose must be positive")

    # Impulses keyed by grid index; events beyond the horizon are ignored.
    carb_impulse: dict[int, float] = {}
    bolus_impulse: dict[int, float] = {}
    bouts: list[ExerciseBout] = []
    windows: list[StressWindow] = []
    for item in inputs:
        if isinstance(item, CarbIntake):
            idx = int(round(item.at_min / dt_min))
            if 0 <= idx <= n_steps:
                carb_impulse[idx] = carb_impulse.get(idx, 0.0) + params.Bio * item.carbs
        elif isinstance(item, InsulinBolus):
            idx = int(round(item.at_min / dt_min))
            if 0 <= idx <= n_steps:
                bolus_impulse[idx] = bolus_impulse.get(idx, 0.0) + item.units
        elif isinstance(item, ExerciseBout):
            bouts.append(item)
        elif isinstance(item, StressWindow):
            windows.append(item)
        else:
            raise TypeError(f"unknown engine input {item!r}")

    p1, p2, p3 = params.p1, params.p2, params.p3
    G_b, I_b, k_e = params.G_b, params.I_b, params.k_e
    t_maxG, t_maxI = params.t_maxG, params.t_maxI
    ra_scale = MMOL_PER_G / (params.V_G * params.BW)
    u_scale = 1000.0 / (params.V_I * params.BW)
    alpha_ex, stress_factor = params.alpha_ex, params.stress_factor

    def deriv(t, G, X, I, D1, D2, S1, S2):
        e = _exercise_rate(t, bouts, alpha_ex) if bouts else 0.0
        s = _stress_multiplier(t, windows, stress_factor) if windows else 1.0
        Ra = D2 / t_maxG
        U = S2 / t_maxI
        return (
            -(p1 * s + X + e) * G + p1 * s * G_b + Ra * ra_scale,
            -p2 * X + p3 * (I - I_b),
            U * u_scale - k_e * (I - I_b),
            -D1 / t_maxG,
            (D1 - D2) / t_maxG,
            -S1 / t_maxI,
            (S1 - S2) / t_maxI,
        )

    out = np.empty((n_steps + 1, 7), dtype=np.float64)
    state = (initial.G, initial.X, initial.I, initial.D1, initial.D2,
             initial.S1, initial.S2)
    half = dt_min / 2.0
    sixth = dt_min / 6.0
    for step in range(n_steps + 1):
        if step in carb_impulse or step in bolus_impulse:
            G, X, I, D1, D2, S1, S2 = state
            state = (G, X, I, D1 + carb_impulse.get(step, 0.0), D2,
                     S1 + bolus_impulse.get(step, 0.0), S2)
        out[step] = state
        if step == n_steps:
            break
        t = step * dt_min
        k1 = deriv(t, *state)
        k2 = deriv(t + half, *(s_i + half * k for s_i, k in zip(state, k1)))
        k3 = deriv(t + half, *(s_i + half * k for s_i, k in zip(state, k2)))
        k4 = deriv(t + dt_min, *(s_i + dt_min * k for s_i, k in zip(state, k3)))
        state = tuple(
            s_i + sixth * (a + 2.0 * (b + c) + d)
            for s_i, a, b, c, d in zip(state, k1, k2, k3, k4)
        )

    if not np.isfinite(out).all():
        raise NonFiniteState("integration produced NaN/Inf; check parameters")
    times = np.arange(n_steps + 1, dtype=np.float64) * dt_min
    return Trajectory(times_min=times, states=out)


# ---------------------------------------------------------------------------
# diary events -> engine inputs

def stress_windows_from_events(
    events: Sequence[DiaryEvent],
) -> list[tuple[str, datetime, Optional[datetime]]]:
    """Absolute (family, on, off) spans where a stress or illness flag is active.

    ``off`` is None for a flag still active at the end of the log.
    """
    on_at: dict[str, datetime] = {}
    spans: list[tuple[str, datetime, Optional[datetime]]] = []
    family = {
        HealthFlag.STRESS_ON: ("stress", True),
        HealthFlag.STRESS_OFF: ("stress", False),
        HealthFlag.ILLNESS_ON: ("illness", True),
        HealthFlag.ILLNESS_OFF: ("illness", False),
    }
    for event in events:
        if event.kind is not EventKind.HEALTH_FLAG:
            continue
        fam, turning_on = family[event.payload.flag]
        if turning_on:
            on_at[fam] = event.timestamp
        elif fam in on_at:
            spans.append((fam, on_at.pop(fam), event.timestamp))
    for fam, start in on_at.items():
        spans.append((fam, start, None))
    spans.sort(key=lambda s: s[1])
    return spans


def inputs_from_events(
    events: Sequence[DiaryEvent],
    t0: datetime,
    horizon_min: float,
    *,
    exclusive_start: bool = False,
) -> list[EngineInput]:
    """Convert diary events to engine inputs with minute offsets from ``t0``.

    Meal and dose impulses outside [t0, t0 + horizon] are dropped;
    ``exclusive_start`` additionally drops impulses at t0 itself (used when
    the initial state already accounts for them).  Exercise bouts are kept
    while any part of bout or tail overlaps the span, and stress windows are
    clipped to it.
    """
    low = 0.0
    inputs: list[EngineInput] = []
    for event in events:
        offset = (event.timestamp - t0).total_seconds() / 60.0
        if event.kind is EventKind.MEAL:
            if (offset > low or (offset == low and not exclusive_start)) and offset <= horizon_min:
                inputs.append(CarbIntake(offset, event.payload.carbs))
        elif event.kind is EventKind.INSULIN_DOSE:
            if (offset > low or (offset == low and not exclusive_start)) and offset <= horizon_min:
                inputs.append(InsulinBolus(offset, event.payload.units))
        elif event.kind is EventKind.EXERCISE:
            end = offset + event.payload.duration + EXERCISE_TAIL_MIN
            if end >= 0 and offset <= horizon_min:
                inputs.append(ExerciseBout(offset, event.payload.duration,
                                           event.payload.intensity))
    for _family, start, end in stress_windows_from_events(events):
        start_min = (start - t0).total_seconds() / 60.0
        end_min = math.inf if end is None else (end - t0).total_seconds() / 60.0
        if end_min <= 0 or start_min > horizon_min:
            continue
        inputs.append(StressWindow(max(start_min, 0.0), end_min))
    return inputs


def state_from_history(
    readings: Sequence[GlucoseReading],
    events: Sequence[DiaryEvent],
    params: ModelParameters,
    window_min: float = REPLAY_WINDOW_MIN,
) -> SimulationState:
    """Reconstruct the current state by replaying recent events.

    Glucose is pinned to the latest reading; absorption compartments, plasma
    insulin and remote action come from replaying the last ``window_min``
    minutes of events through the model.  Raises :class:`StaleData` when no
    reading exists.
    """
    if not readings:
        raise StaleData("no CGM readings available")
    latest = max(readings, key=lambda r: r.timestamp)
    t0 = latest.timestamp - timedelta(minutes=window_min)
    inputs = inputs_from_events(events, t0, window_min)
    traj = simulate(basal_state(params), params, inputs, window_min)
    return replace(traj.final_state(), G=latest.value)


@dataclass(frozen=True)
class PredictionResult:
    """Two-hour glucose trajectory with a deterministic confidence band."""
    start_time: datetime
    step: float                 # minutes
    points: np.ndarray          # mmol/L
    lower: np.ndarray
    upper: np.ndarray
    horizon: float              # minutes

    def to_dict(self) -> dict:
        from .domain import format_timestamp
        return {
            "start_time": format_timestamp(self.start_time),
            "step": self.step,
            "points": [float(v) for v in self.points],
            "lower": [float(v) for v in self.lower],
            "upper": [float(v) for v in self.upper],
            "horizon": self.horizon,
        }


def predict(
    now: datetime,
    readings: Sequence[GlucoseReading],
    events: Sequence[DiaryEvent],
    params: ModelParameters,
    *,
    candidate_carbs: Optional[float] = None,
    candidate_dose: Optional[float] = None,
    horizon_min: float = PREDICTION_HORIZON_MIN,
    step_min: float = PREDICTION_STEP_MIN,
) -> PredictionResult:
    """Predict glucose over the next two hours, optionally with a hypothetical
    meal and/or dose taken at ``now``.

    The trajectory is anchored at the latest CGM reading (its value is the
    initial point) and requires one within the last 15 minutes.  The band is
    ``points[k] +/- z * sigma0 * sqrt(k * step/5)``: zero width now, widening
    with the horizon.
    """
    if not readings:
        raise StaleData("no CGM readings available")
    latest = max(readings, key=lambda r: r.timestamp)
    age_min = (now - latest.timestamp).total_seconds() / 60.0
    if age_min > MAX_READING_AGE_MIN:
        raise StaleData(
            f"latest reading is {age_min:.1f} min old (limit {MAX_READING_AGE_MIN:g} min)"
        )

    initial = state_from_history(readings, events, params)
    start = latest.timestamp
    # Meals/doses at or before the anchor are already in the reconstructed
    # compartments; stress windows and running exercise bouts still apply.
    inputs = inputs_from_events(events, start, horizon_min, exclusive_start=True)
    candidate_at = max(0.0, (now - start).total_seconds() / 60.0)
    if candidate_carbs:
        inputs.append(CarbIntake(candidate_at, candidate_carbs))
    if candidate_dose:
        inputs.append(InsulinBolus(candidate_at, candidate_dose))

    traj = simulate(initial, params, inputs, horizon_min, INTERNAL_DT_MIN)
    stride = int(round(step_min / INTERNAL_DT_MIN))
    points = traj.G[::stride].copy()
    k = np.arange(points.size, dtype=np.float64)
    half_width = params.z * params.sigma0 * np.sqrt(k * step_min / 5.0)
    return PredictionResult(
        start_time=start,
        step=step_min,
        points=points,
        lower=points - half_width,
        upper=points + half_width,
        horizon=horizon_min,
    )
