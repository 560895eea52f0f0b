#!/usr/bin/env python3
"""End-to-end tour of the HTTP API with an in-process test client.

Seeds a demo patient, then exercises every endpoint the companion UI uses:
diary geometry, day detail, exploration and commit, advice, statistics,
settings and the meal library.
"""
import json
import tempfile
from datetime import datetime, timezone

from fastapi.testclient import TestClient

from glucoplan.demo import seed_demo
from glucoplan.http_api import create_app
from glucoplan.service import DecisionService

anchor = datetime(2026, 8, 7, 12, 0, tzinfo=timezone.utc)
store = seed_demo(tempfile.mkdtemp(prefix="glucoplan-demo-"), days=7,
                  seed=1, now=anchor)
service = DecisionService(store, now_fn=lambda: anchor)
client = TestClient(create_app(service=service))


def show(label, response, keys=None):
    body = response.json()
    if keys:
        body = {k: body[k] for k in keys if k in body}
    print(f"{label}  [{response.status_code}]")
    print(f"  {json.dumps(body)[:180]}")


show("GET  /cgm/latest", client.get("/cgm/latest"))
show("GET  /settings", client.get("/settings"))
show("GET  /stats?period=week", client.get("/stats", params={"period": "week"}))
show("GET  /advice", client.get("/advice"))
show("GET  /meals", client.get("/meals"), keys=["profiles"])

diary = client.get("/diary")
doc = diary.json()
print(f"GET  /diary  [{diary.status_code}]")
print(f"  focal {doc['focal_day']}, {len(doc['segments'])} segments, "
      f"{len(doc['focus']['glucose'])} glucose points in focus")

explored = client.post("/explore", json={"carbs": 40})
show("POST /explore carbs=40", explored, keys=["recommended"])

committed = client.post("/explore/commit", json={
    "carbs": 40,
    "accept_dose": True,
    "expected_total": explored.json()["recommended"]["total"],
})
print(f"POST /explore/commit  [{committed.status_code}]  "
      f"appended {[e['kind'] for e in committed.json()['appended']]}")

day = client.get(f"/day/{anchor.date().isoformat()}")
detail = day.json()
print(f"GET  /day/{anchor.date()}  [{day.status_code}]  "
      f"{len(detail['overlay'])} meals, {len(detail['dose_markers'])} doses")

# validation is enforced at the edge
bad = client.put("/settings", json={"hypo_threshold": 12.0})
print(f"PUT  /settings (hypo above hyper)  [{bad.status_code}]  "
      f"{bad.json()['error'][:60]}")
