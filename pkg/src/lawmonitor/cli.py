"""Command-line interface: monitoring, calibration, reporting, DSL checks.

Exit codes: 0 success; 1 violations found under ``--fail-on-violation``;
2 usage or input errors.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from typing import Optional, Sequence

from . import dataset
from .calibration import CalibrationError, calibrate
from .config import ThresholdConfig
from .events import ViolationEvent
from .highway import HighwayMonitor
from .intersection import IntersectionMap, IntersectionMonitor
from .mtl import MTLError, parse_formula
from .reporting import ViolationReport, aggregate_events, emit_report

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_ERROR = 2


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lawmonitor",
                                description="Traffic-law violation monitoring "
                                            "over trajectory recordings.")
    sub = p.add_subparsers(dest="command", required=True)

    def add_monitor_args(sp):
        sp.add_argument("trajectories", help="trajectory CSV path")
        sp.add_argument("map", help="map JSON path")
        sp.add_argument("--config", help="threshold config JSON")
        sp.add_argument("--ego", default="all",
                        help="ego vehicle id, or 'all' for the full sweep")
        sp.add_argument("--schema", default="canonical",
                        choices=sorted(dataset.SCHEMAS),
                        help="trajectory column schema")
        sp.add_argument("--rate", type=float, default=25.0,
                        help="recording sampling rate in Hz")
        sp.add_argument("--out", help="report output path (default stdout)")
        sp.add_argument("--bin", type=float, default=None,
                        help="report bin width in seconds")
        sp.add_argument("--fail-on-violation", action="store_true",
                        help="exit 1 when any violation event is found")

    add_monitor_args(sub.add_parser("monitor-highway",
                                    help="monitor a highway recording"))
    add_monitor_args(sub.add_parser("monitor-intersection",
                                    help="monitor an intersection recording"))

    sp = sub.add_parser("calibrate", help="extract thresholds from a recording")
    sp.add_argument("trajectories")
    sp.add_argument("map")
    sp.add_argument("--schema", default="canonical", choices=sorted(dataset.SCHEMAS))
    sp.add_argument("--rate", type=float, default=25.0)
    sp.add_argument("--coverage", type=float, default=0.9992)
    sp.add_argument("--dividing-deceleration", type=float, default=0.35)
    sp.add_argument("--out", help="calibration report output path (default stdout)")
    sp.add_argument("--out-config", help="write calibrated thresholds into a "
                                         "ThresholdConfig JSON at this path")

    sp = sub.add_parser("report", help="re-bin a serialized event log")
    sp.add_argument("events", help="events JSON (event list or report document)")
    sp.add_argument("--bin", type=float, default=5.0)
    sp.add_argument("--format", default="json", choices=("json", "csv"))
    sp.add_argument("--out")

    sp = sub.add_parser("check-formula", help="parse and validate a formula file")
    sp.add_argument("formula", help="file containing one formula in the DSL")
    return p


def _load_cfg(path: Optional[str]) -> ThresholdConfig:
    return ThresholdConfig.load(path) if path else ThresholdConfig()


def _run_monitor(args, intersection: bool) -> int:
    cfg = _load_cfg(args.config)
    road_map = dataset.load_map(args.map)
    is_intersection_map = isinstance(road_map, IntersectionMap)
    if intersection != is_intersection_map:
        raise ValueError(f"{args.map}: map type does not match the subcommand")
    lights = dataset.load_light_phases(args.map) if intersection else {}
    recording = dataset.load_trajectories(args.trajectories,
                                          dataset.SCHEMAS[args.schema],
                                          rate_hz=args.rate, lights=lights)
    ego_ids = recording.vehicle_ids() if args.ego == "all" else [args.ego]
    events: list[ViolationEvent] = []
    advisories: list[ViolationEvent] = []
    for ego_id in ego_ids:
        if intersection:
            monitor = IntersectionMonitor(ego_id, road_map, cfg)
        else:
            monitor = HighwayMonitor(ego_id, cfg)
        for frame in dataset.replay(recording, ego_id, road_map, cfg):
            monitor.step(frame)
        monitor.finish()
        events.extend(monitor.events)
        advisories.extend(monitor.advisories)
    bin_width = args.bin if args.bin is not None else (
        cfg.intersection_bin_width_s if intersection else cfg.highway_bin_width_s)
    report = aggregate_events(events, bin_width, advisories,
                              metadata={"trajectories": args.trajectories,
                                        "map": args.map,
                                        "ego": args.ego})
    _write(emit_report(report, "json"), args.out)
    if args.fail_on_violation and events:
        return EXIT_VIOLATIONS
    return EXIT_OK


def _run_calibrate(args) -> int:
    road_map = dataset.load_map(args.map)
    if isinstance(road_map, IntersectionMap):
        raise ValueError("calibration requires a highway recording")
    recording = dataset.load_trajectories(args.trajectories,
                                          dataset.SCHEMAS[args.schema],
                                          rate_hz=args.rate)
    result = calibrate(recording, road_map, coverage=args.coverage,
                       dividing_deceleration=args.dividing_deceleration)
    _write(json.dumps(result.to_dict(), indent=2, sort_keys=True), args.out)
    if args.out_config:
        result.apply_to(ThresholdConfig()).save(args.out_config)
    return EXIT_OK


def _run_report(args) -> int:
    with open(args.events) as f:
        raw = json.load(f)
    if isinstance(raw, dict) and "events" in raw:
        events = [ViolationEvent.from_dict(e) for e in raw["events"]]
        advisories = [ViolationEvent.from_dict(a) for a in raw.get("advisories", [])]
    elif isinstance(raw, list):
        events = [ViolationEvent.from_dict(e) for e in raw]
        advisories = []
    else:
        raise ValueError(f"{args.events}: expected an event list or report document")
    report = aggregate_events(events, args.bin, advisories)
    _write(emit_report(report, args.format), args.out)
    return EXIT_OK


_KEYWORDS = {"T", "inf", "U", "G", "F", "P", "O"}


def _run_check_formula(args) -> int:
    with open(args.formula) as f:
        text = f.read().strip()
    atoms = {tok for tok in re.findall(r"[A-Za-z_][A-Za-z0-9_]*", text)
             if tok not in _KEYWORDS}
    formula = parse_formula(text, atoms or {"_"})
    print(f"OK: {formula.to_dsl()}")
    return EXIT_OK


def _write(text: str, out: Optional[str]):
    if out:
        with open(out, "w") as f:
            f.write(text if text.endswith("\n") else text + "\n")
    else:
        print(text)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_ERROR if e.code not in (0, None) else EXIT_OK
    try:
        if args.command == "monitor-highway":
            return _run_monitor(args, intersection=False)
        if args.command == "monitor-intersection":
            return _run_monitor(args, intersection=True)
        if args.command == "calibrate":
            return _run_calibrate(args)
        if args.command == "report":
            return _run_report(args)
        if args.command == "check-formula":
            return _run_check_formula(args)
        raise ValueError(f"unknown command {args.command!r}")
    except (OSError, ValueError, KeyError, MTLError, CalibrationError,
            json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
