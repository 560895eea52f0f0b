"""HTTP/JSON surface for the decision service.

Bodies mirror the domain types' canonical JSON.  Validation errors map to
400, out-of-order appends to 409, and missing/stale CGM data to 503.
"""
from __future__ import annotations

from datetime import date
from typing import Optional

from fastapi import Body, FastAPI, Query, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .domain import (
    InvariantViolation,
    OutOfOrder,
    event_from_dict,
    event_to_dict,
    meal_profile_from_dict,
    meal_profile_to_dict,
    reading_to_dict,
    settings_from_dict,
    settings_to_dict,
)
from .engine import StaleData
from .service import (
    DecisionService,
    ValidationFailure,
    explore_request_from_dict,
)
from .store import EventStore


def create_app(
    data_dir=None,
    service: Optional[DecisionService] = None,
    ui_dir=None,
) -> FastAPI:
    """Build the API over an existing service or a data directory.

    ``ui_dir`` optionally mounts a static frontend bundle at /ui.
    """
    if service is None:
        if data_dir is None:
            raise ValueError("either data_dir or service is required")
        service = DecisionService(EventStore(data_dir))

    app = FastAPI(title="glucoplan", version="0.1.0")
    app.state.service = service
    # single-patient desk service; the companion UI may be served from anywhere
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(OutOfOrder)
    async def _out_of_order(_request: Request, exc: OutOfOrder):
        return JSONResponse(status_code=409, content={"error": str(exc)})

    @app.exception_handler(StaleData)
    async def _stale(_request: Request, exc: StaleData):
        return JSONResponse(status_code=503, content={"error": str(exc)})

    @app.exception_handler(InvariantViolation)
    async def _invalid(_request: Request, exc: InvariantViolation):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.exception_handler(ValidationFailure)
    async def _commit_invalid(_request: Request, exc: ValidationFailure):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.exception_handler(ValueError)
    async def _value_error(_request: Request, exc: ValueError):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.get("/diary")
    def get_diary(focal: Optional[str] = Query(default=None)):
        focal_day = date.fromisoformat(focal) if focal else None
        return service.diary_geometry(focal_day)

    @app.get("/day/{day}")
    def get_day(day: str):
        return service.day_detail(date.fromisoformat(day))

    @app.post("/events", status_code=201)
    def post_event(payload: dict = Body(...)):
        event = event_from_dict(payload)
        seq = service.store.append(event)
        return {"seq": seq, "event": event_to_dict(event)}

    @app.post("/explore")
    def post_explore(payload: dict = Body(...)):
        request = explore_request_from_dict(payload, service.now())
        return service.explore(request).to_dict()

    @app.post("/explore/commit", status_code=201)
    def post_commit(payload: dict = Body(...)):
        request = explore_request_from_dict(payload, service.now())
        events = service.commit_exploration(
            request,
            accept_dose=bool(payload.get("accept_dose", True)),
            expected_total=payload.get("expected_total"),
        )
        return {"appended": [event_to_dict(e) for e in events]}

    @app.get("/stats")
    def get_stats(
        period: str = Query(default="week"),
        at: Optional[str] = Query(default=None),
    ):
        at_day = date.fromisoformat(at) if at else service.now().date()
        return service.store.period_statistics(period, at_day).to_dict()

    @app.get("/advice")
    def get_advice():
        return {"items": [item.to_dict() for item in service.advice()]}

    @app.get("/settings")
    def get_settings():
        return settings_to_dict(service.settings)

    @app.put("/settings")
    def put_settings(payload: dict = Body(...)):
        current = settings_to_dict(service.settings)
        current.update(payload)
        updated = service.store.put_settings(settings_from_dict(current))
        return settings_to_dict(updated)

    @app.get("/meals")
    def get_meals():
        return {"profiles": [meal_profile_to_dict(p) for p in service.store.meal_profiles()]}

    @app.post("/meals", status_code=201)
    def post_meal(payload: dict = Body(...)):
        profile = service.store.add_meal_profile(meal_profile_from_dict(payload))
        return meal_profile_to_dict(profile)

    @app.get("/cgm/latest")
    def get_latest_reading():
        latest = service.store.latest_reading()
        if latest is None:
            raise StaleData("no CGM readings available")
        return reading_to_dict(latest)

    if ui_dir is not None:
        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
