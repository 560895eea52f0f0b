#!/usr/bin/env python3
"""The bifocal diary: focus+context geometry over a seeded week.

Seeds a demo week, lays out the day strip (focal day wide, context days
compressed), renders the time-in-band bars as ASCII, and plots the full
geometry document the companion UI would draw.
"""
import tempfile
from datetime import datetime, timezone
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from glucoplan.demo import seed_demo
from glucoplan.service import DecisionService

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

anchor = datetime(2026, 8, 7, 12, 0, tzinfo=timezone.utc)
store = seed_demo(tempfile.mkdtemp(prefix="glucoplan-demo-"), days=9,
                  seed=2026, now=anchor)
service = DecisionService(store, now_fn=lambda: anchor)

doc = service.diary_geometry()
print(f"focal day {doc['focal_day']}, now marker at x={doc['now_x']:.3f}\n")
print("segment layout (x ranges over a unit-width display):")
for seg in doc["segments"]:
    width = seg["x_end"] - seg["x_start"]
    bar = "#" * round(width * 60)
    print(f"  {seg['day']}  {seg['kind']:<7}  [{seg['x_start']:.3f}, "
          f"{seg['x_end']:.3f}]  {bar}")

print("\ntime-in-band bars (low / in / high per day):")
for day in doc["days"]:
    if not day["has_data"]:
        print(f"  {day['date']}  (no data)")
        continue
    low, mid, high = day["pct_low"], day["pct_in"], day["pct_high"]
    cells = ("v" * round(low / 5) + "=" * round(mid / 5) + "^" * round(high / 5))
    icons = "".join(
        {"meal": "M", "insulin_dose": "i", "exercise": "E", "health_flag": "!"}
        [icon["kind"]]
        for icon in day["icons"]
    )
    print(f"  {day['date']}  {cells:<22} low {low:5.1f}%  in {mid:5.1f}%  "
          f"high {high:5.1f}%  events: {icons}")

# draw what the UI draws: compressed context, wide focus, glucose polyline
fig, ax = plt.subplots(figsize=(12, 4))
for seg in doc["segments"]:
    color = "#fff4d6" if seg["kind"] == "focus" else "#eef1f5"
    ax.axvspan(seg["x_start"], seg["x_end"], color=color)
    ax.axvline(seg["x_start"], color="white", lw=1)
focus = doc["focus"]
xs = [p["x"] for p in focus["glucose"]]
ys = [p["glucose"] for p in focus["glucose"]]
ax.plot(xs, ys, lw=1.2, color="#355e8d", label="glucose (focal day)")
for marker in focus["dose_markers"]:
    ax.annotate(f"{marker['units']:g}", (marker["x"], 3.0),
                ha="center", fontsize=8,
                bbox=dict(boxstyle="circle", fc="#cfe3ff", ec="#355e8d"))
if doc["now_x"] is not None:
    ax.axvline(doc["now_x"], color="black", lw=1.5, label="now")
if focus["prediction"]:
    pred = focus["prediction"]
    keep = [(x, p, lo, up) for x, p, lo, up in
            zip(pred["x"], pred["points"], pred["lower"], pred["upper"])
            if x is not None]
    ax.plot([k[0] for k in keep], [k[1] for k in keep], "--",
            color="#7a4f9e", label="prediction")
    ax.fill_between([k[0] for k in keep], [k[2] for k in keep],
                    [k[3] for k in keep], color="#7a4f9e", alpha=0.15)
ax.set_xlim(0, 1)
ax.set_ylim(2, 14)
ax.set_ylabel("glucose [mmol/L]")
ax.set_xticks([])
ax.legend(loc="upper left", fontsize=8)
ax.set_title("bifocal diary: compressed context days around an undistorted focal day")
fig.tight_layout()
fig.savefig(OUT / "bifocal_diary.png", dpi=120)
print(f"\nwrote {OUT / 'bifocal_diary.png'}")
