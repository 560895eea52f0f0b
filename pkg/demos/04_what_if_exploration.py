#!/usr/bin/env python3
"""What-if exploration: dragging the carb slider and the dose box.

Sweeps carbs 0..120 g the way a slider drag would, printing the recommended
dose and predicted two-hour endpoint for each value, then sweeps the dose at
fixed carbs.  Ends by committing the chosen meal to the diary.
"""
import tempfile
import time
from datetime import datetime, timezone

from glucoplan.demo import seed_demo
from glucoplan.service import DecisionService, ExploreMode, ExploreRequest

anchor = datetime(2026, 8, 7, 12, 0, tzinfo=timezone.utc)
store = seed_demo(tempfile.mkdtemp(prefix="glucoplan-demo-"), days=7,
                  seed=7, now=anchor)
service = DecisionService(store, now_fn=lambda: anchor)

print("carb slider sweep (dose follows the recommendation):")
print(f"{'carbs':>6}  {'dose':>5}  {'2-h endpoint':>12}  latency")
timings = []
for carbs in range(0, 121, 10):
    started = time.perf_counter()
    response = service.explore(
        ExploreRequest(ExploreMode.CARB_SWEEP, float(carbs), anchor))
    elapsed = (time.perf_counter() - started) * 1000
    timings.append(elapsed)
    print(f"{carbs:>6}  {response.recommended.total:>5.1f}  "
          f"{float(response.prediction.points[-1]):>12.2f}  {elapsed:5.1f} ms")
print(f"mean latency {sum(timings)/len(timings):.1f} ms "
      f"(budget: 50 ms p95 for slider tracking)\n")

print("dose box sweep at 40 g (vertical drag on the insulin box):")
for dose in (0.0, 2.0, 4.0, 6.0, 8.0):
    response = service.explore(ExploreRequest(
        ExploreMode.DOSE_SWEEP, 40.0, anchor, dose_override=dose))
    print(f"  dose {dose:>4.1f} U -> 2-h endpoint "
          f"{float(response.prediction.points[-1]):5.2f} mmol/L")

print("\ncommitting 40 g with the recommended dose:")
request = ExploreRequest(ExploreMode.CARB_SWEEP, 40.0, anchor)
explored = service.explore(request)
events = service.commit_exploration(
    request, accept_dose=True, expected_total=explored.recommended.total)
for event in events:
    print(f"  appended {event.kind.value} at {event.timestamp:%H:%M}")
print(f"diary now holds {len(store.events())} events")
