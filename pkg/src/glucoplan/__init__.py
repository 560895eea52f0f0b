"""Glucose prediction, bolus advice and bifocal-diary decision support."""

from .bolus import BolusBreakdown, insulin_on_board, recommend
from .domain import (
    DiaryEvent,
    DoseSource,
    EventKind,
    GlucoseReading,
    HealthFlag,
    MealCategory,
    MealProfile,
    PatientSettings,
    default_meal_category,
    validate_event,
)
from .engine import (
    ModelParameters,
    PredictionResult,
    SimulationState,
    predict,
    simulate,
    state_from_history,
)
from .service import DecisionService, ExploreMode, ExploreRequest
from .store import EventStore
from .timeline import BifocalConfig, BifocalLayout, day_stats, layout, snap_target

__version__ = "0.1.0"

__all__ = [
    "BifocalConfig",
    "BifocalLayout",
    "BolusBreakdown",
    "DecisionService",
    "DiaryEvent",
    "DoseSource",
    "EventKind",
    "EventStore",
    "ExploreMode",
    "ExploreRequest",
    "GlucoseReading",
    "HealthFlag",
    "MealCategory",
    "MealProfile",
    "ModelParameters",
    "PatientSettings",
    "PredictionResult",
    "SimulationState",
    "day_stats",
    "default_meal_category",
    "insulin_on_board",
    "layout",
    "predict",
    "recommend",
    "simulate",
    "snap_target",
    "state_from_history",
    "validate_event",
]
