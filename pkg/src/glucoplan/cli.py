"""Command-line entry points: serve, seed-demo, predict, stats."""
from __future__ import annotations

import argparse
import json
import sys
from datetime import date

from .demo import seed_demo
from .domain import event_from_dict
from .service import (
    DecisionService,
    ExploreMode,
    ExploreRequest,
)
from .store import EventStore

DEFAULT_DATA_DIR = "glucoplan-data"


def _add_data_dir(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--data-dir", default=DEFAULT_DATA_DIR,
        help=f"patient data directory (default: {DEFAULT_DATA_DIR})",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="glucoplan",
        description="Glucose prediction, bolus advice and diary services",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the HTTP API")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--ui-dir", default=None,
                       help="static frontend bundle to mount at /ui")
    _add_data_dir(serve)

    demo = sub.add_parser("seed-demo", help="populate a demo data directory")
    demo.add_argument("--days", type=int, default=7)
    demo.add_argument("--seed", type=int, default=42)
    demo.add_argument(
        "--scenario", default=None,
        help="NDJSON file of diary events replacing the generated script",
    )
    _add_data_dir(demo)

    predict = sub.add_parser("predict", help="print a two-hour what-if trajectory")
    predict.add_argument("--carbs", type=float, required=True)
    predict.add_argument("--dose", type=float, default=None,
                         help="override the recommended dose (dose sweep)")
    _add_data_dir(predict)

    stats = sub.add_parser("stats", help="period statistics from the diary")
    stats.add_argument("--period", choices=("day", "week", "month"), default="week")
    stats.add_argument("--at", default=None, help="anchor date (YYYY-MM-DD, default today)")
    _add_data_dir(stats)

    return parser


def _cmd_serve(args) -> int:
    import uvicorn

    from .http_api import create_app

    app = create_app(data_dir=args.data_dir, ui_dir=args.ui_dir)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def _cmd_seed_demo(args) -> int:
    scenario = None
    if args.scenario:
        with open(args.scenario, encoding="utf-8") as fh:
            scenario = [
                event_from_dict(json.loads(line))
                for line in fh if line.strip()
            ]
    store = seed_demo(args.data_dir, days=args.days, seed=args.seed,
                      scenario=scenario)
    print(f"seeded {len(store.events())} events and {len(store.readings())} readings "
          f"into {store.data_dir}")
    print(f"state hash: {store.state_hash()}")
    return 0


def _cmd_predict(args) -> int:
    service = DecisionService(EventStore(args.data_dir))
    latest = service.store.latest_reading()
    if latest is None:
        print("no CGM readings; run seed-demo first", file=sys.stderr)
        return 1
    at = latest.timestamp
    mode = ExploreMode.DOSE_SWEEP if args.dose is not None else ExploreMode.CARB_SWEEP
    request = ExploreRequest(mode=mode, carbs=args.carbs, at=at,
                             dose_override=args.dose)
    response = service.explore(request)
    rec = response.recommended
    dose = args.dose if args.dose is not None else rec.total
    print(f"carbs {args.carbs:g} g, dose {dose:g} U "
          f"(meal {rec.meal_component:.2f} + correction {rec.correction_component:.2f} "
          f"- IOB {rec.iob_deduction:.2f} -> recommended {rec.total:g} U)")
    print(f"{'minute':>6}  {'glucose':>8}  {'lower':>7}  {'upper':>7}")
    pred = response.prediction
    for k in range(len(pred.points)):
        minute = int(k * pred.step)
        print(f"{minute:>6}  {pred.points[k]:>8.2f}  {pred.lower[k]:>7.2f}  "
              f"{pred.upper[k]:>7.2f}")
    return 0


def _cmd_stats(args) -> int:
    store = EventStore(args.data_dir)
    at = date.fromisoformat(args.at) if args.at else _default_stats_day(store)
    result = store.period_statistics(args.period, at)
    print(json.dumps(result.to_dict(), indent=2))
    return 0


def _default_stats_day(store: EventStore) -> date:
    latest = store.latest_reading()
    return latest.timestamp.date() if latest else date.today()


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "serve": _cmd_serve,
        "seed-demo": _cmd_seed_demo,
        "predict": _cmd_predict,
        "stats": _cmd_stats,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
