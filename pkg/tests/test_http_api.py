"""HTTP surface: endpoint contracts and error-code mapping."""
from __future__ import annotations

from datetime import timedelta

import pytest
from fastapi.testclient import TestClient

from glucoplan.domain import event_to_dict, make_meal_event
from glucoplan.http_api import create_app
from glucoplan.service import DecisionService
from glucoplan.store import EventStore

from conftest import ANCHOR, flat_readings


@pytest.fixture
def client(quiescent_store):
    service = DecisionService(quiescent_store, now_fn=lambda: ANCHOR)
    return TestClient(create_app(service=service))


@pytest.fixture
def empty_client(tmp_path):
    service = DecisionService(EventStore(tmp_path / "empty"),
                              now_fn=lambda: ANCHOR)
    return TestClient(create_app(service=service))


class TestDiaryEndpoints:
    def test_diary_segments_tile(self, client):
        doc = client.get("/diary").json()
        total = sum(s["x_end"] - s["x_start"] for s in doc["segments"])
        assert abs(total - 1.0) < 1e-12
        assert doc["focal_day"] == ANCHOR.date().isoformat()

    def test_diary_explicit_focal_date(self, client):
        day = (ANCHOR - timedelta(days=2)).date().isoformat()
        doc = client.get("/diary", params={"focal": day}).json()
        assert doc["focal_day"] == day

    def test_diary_bad_date_is_400(self, client):
        assert client.get("/diary", params={"focal": "not-a-date"}).status_code == 400

    def test_day_detail(self, client):
        day = ANCHOR.date().isoformat()
        detail = client.get(f"/day/{day}").json()
        assert detail["date"] == day
        assert len(detail["glucose"]) > 0


class TestEvents:
    def test_post_event(self, client):
        event = make_meal_event(ANCHOR, 40.0)
        response = client.post("/events", json=event_to_dict(event))
        assert response.status_code == 201
        assert response.json()["seq"] == 1

    def test_post_invalid_event_is_400(self, client):
        event = make_meal_event(ANCHOR, -5.0)
        response = client.post("/events", json=event_to_dict(event))
        assert response.status_code == 400
        assert "carbs" in response.json()["error"]

    def test_post_out_of_order_is_409(self, client):
        client.post("/events", json=event_to_dict(make_meal_event(ANCHOR, 40.0)))
        stale = make_meal_event(ANCHOR - timedelta(hours=1), 20.0)
        response = client.post("/events", json=event_to_dict(stale))
        assert response.status_code == 409


class TestExplore:
    def test_explore_fig13(self, client):
        response = client.post("/explore", json={"carbs": 40.0})
        assert response.status_code == 200
        body = response.json()
        assert body["recommended"]["total"] == 4.0
        assert len(body["prediction"]["points"]) == 25
        assert body["prediction"]["points"][0] == 6.5
        assert body["request"]["mode"] == "carb_sweep"

    def test_explore_dose_sweep(self, client):
        response = client.post("/explore", json={
            "mode": "dose_sweep", "carbs": 40.0, "dose_override": 8.0,
        })
        assert response.status_code == 200
        assert response.json()["recommended"]["total"] == 4.0

    def test_dose_sweep_without_override_is_400(self, client):
        response = client.post("/explore", json={"mode": "dose_sweep", "carbs": 40.0})
        assert response.status_code == 400

    def test_explore_on_empty_store_is_503(self, empty_client):
        response = empty_client.post("/explore", json={"carbs": 40.0})
        assert response.status_code == 503

    def test_explore_then_commit_flow(self, client):
        explored = client.post("/explore", json={"carbs": 40.0}).json()
        commit = client.post("/explore/commit", json={
            "carbs": 40.0,
            "accept_dose": True,
            "expected_total": explored["recommended"]["total"],
        })
        assert commit.status_code == 201
        appended = commit.json()["appended"]
        assert [e["kind"] for e in appended] == ["meal", "insulin_dose"]
        # diary now reflects the committed meal
        doc = client.get("/diary").json()
        assert doc["focus"]["overlay"][0]["carbs"] == 40.0

    def test_commit_without_explore_is_400(self, client):
        response = client.post("/explore/commit", json={"carbs": 40.0})
        assert response.status_code == 400


class TestStatsAdviceSettings:
    def test_stats(self, client):
        body = client.get("/stats", params={"period": "week"}).json()
        assert body["period"] == "week"
        assert body["pct_time_in_range"] == pytest.approx(100.0)

    def test_stats_bad_period_is_400(self, client):
        assert client.get("/stats", params={"period": "decade"}).status_code == 400

    def test_advice_empty_when_quiet(self, client):
        assert client.get("/advice").json() == {"items": []}

    def test_advice_low_now(self, tmp_path):
        store = EventStore(tmp_path)
        store.ingest_readings(flat_readings(3.0))
        service = DecisionService(store, now_fn=lambda: ANCHOR)
        client = TestClient(create_app(service=service))
        codes = [item["code"] for item in client.get("/advice").json()["items"]]
        assert "LowNow" in codes

    def test_settings_get_put(self, client):
        assert client.get("/settings").json()["ICR"] == 10.0
        response = client.put("/settings", json={"ICR": 8.0})
        assert response.status_code == 200
        assert response.json()["ICR"] == 8.0
        assert client.get("/settings").json()["ICR"] == 8.0

    def test_settings_invalid_band_is_400(self, client):
        response = client.put("/settings", json={
            "hypo_threshold": 11.0, "hyper_threshold": 10.0,
        })
        assert response.status_code == 400
        assert client.get("/settings").json()["hypo_threshold"] == 3.9

    def test_settings_unknown_field_is_400(self, client):
        assert client.put("/settings", json={"bogus": 1}).status_code == 400


class TestMealsAndCgm:
    def test_meal_library_roundtrip(self, client):
        assert client.get("/meals").json() == {"profiles": []}
        profile = {
            "id": "porridge", "name": "Porridge", "carbs": 45.0,
            "protein": 10.0, "fat": 6.0, "image_ref": "images/porridge.jpg",
            "category": "breakfast", "created_at": "2026-08-01T08:00:00+00:00",
        }
        assert client.post("/meals", json=profile).status_code == 201
        listed = client.get("/meals").json()["profiles"]
        assert len(listed) == 1
        assert listed[0]["id"] == "porridge"

    def test_meal_duplicate_is_400(self, client):
        profile = {
            "id": "porridge", "name": "Porridge", "carbs": 45.0,
            "image_ref": "", "category": "breakfast",
            "created_at": "2026-08-01T08:00:00+00:00",
        }
        client.post("/meals", json=profile)
        assert client.post("/meals", json=profile).status_code == 400

    def test_cgm_latest(self, client):
        body = client.get("/cgm/latest").json()
        assert body["value"] == 6.5
        assert body["timestamp"] == "2026-08-07T12:00:00+00:00"

    def test_cgm_latest_empty_is_503(self, empty_client):
        assert empty_client.get("/cgm/latest").status_code == 503
