"""Trajectory recording and map ingestion, and replay into frame streams.

Trajectory files are CSVs mapped to canonical fields through a
:class:`TrajectorySchema` (column renames plus per-column units).  Maps are
JSON: a highway map lists lane-line polylines (fitted to cubics at load);
an intersection map lists four roads with entry/exit lane centerlines,
stop lines, crosswalks and optional light-phase timelines.

Replay turns a recording into per-ego :class:`SceneFrame` streams: highway
streams are expressed in the ego frame, intersection streams stay in the
global map frame, and decisions are inferred when the recording carries no
decision channel.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Iterator, Optional, Sequence, Union

import numpy as np
import pandas as pd
from shapely.geometry import Point

from .config import ThresholdConfig
from .decisions import HighwayDecisionLatch, infer_intersection_decision
from .geometry import CubicCurve
from .intersection import Crosswalk, IntersectionMap, MapLane, Road, _lane_polygon
from .world import (
    GO_STRAIGHT,
    ROAD_INTERSECTION,
    ROAD_MAINWAY,
    Decision,
    LaneGeometry,
    LaneLine,
    PedestrianState,
    SceneFrame,
    VehicleState,
    pedestrian_to_ego_frame,
    to_ego_frame,
)


class SchemaError(ValueError):
    """Trajectory file does not satisfy its declared schema."""


class MapError(ValueError):
    """Map file fails schema or geometric validation."""


# ---------------------------------------------------------------------------
# Trajectory schema
# ---------------------------------------------------------------------------

MANDATORY_FIELDS = ("id", "frame", "x", "y", "vx", "vy", "width", "length")
OPTIONAL_FIELDS = ("heading", "ax", "ay", "class", "decision")

_UNIT_FACTORS = {
    "m": 1.0, "m/s": 1.0, "m/s^2": 1.0, "km/h": 1.0 / 3.6,
    "rad": 1.0, "deg": math.pi / 180.0,
}


@dataclass(frozen=True)
class TrajectorySchema:
    """Maps canonical field names to source CSV headers with units."""

    name: str
    columns: dict[str, str]            # canonical field -> source header
    units: dict[str, str] = field(default_factory=dict)  # canonical -> unit

    def __post_init__(self):
        missing = [f for f in MANDATORY_FIELDS if f not in self.columns]
        if missing:
            raise SchemaError(f"schema {self.name!r} missing mandatory field(s): "
                              + ", ".join(missing))
        for f, u in self.units.items():
            if u not in _UNIT_FACTORS:
                raise SchemaError(f"schema {self.name!r}: unknown unit {u!r} for {f!r}")


CANONICAL_SCHEMA = TrajectorySchema(
    "canonical",
    {"id": "id", "frame": "frame", "x": "x", "y": "y", "vx": "vx", "vy": "vy",
     "width": "width", "length": "length", "heading": "heading",
     "ax": "ax", "ay": "ay", "class": "class", "decision": "decision"},
    {"x": "m", "y": "m", "vx": "m/s", "vy": "m/s", "heading": "rad"})

# aerial-survey highway layout (track/frame-keyed, velocities in m/s)
AERIAL_HIGHWAY_SCHEMA = TrajectorySchema(
    "aerial-highway",
    {"id": "trackId", "frame": "frame", "x": "xCenter", "y": "yCenter",
     "vx": "xVelocity", "vy": "yVelocity", "ax": "xAcceleration",
     "ay": "yAcceleration", "width": "width", "length": "length",
     "class": "class"},
    {"x": "m", "y": "m", "vx": "m/s", "vy": "m/s"})

# signalized-intersection layout (agent-typed, yaw in radians)
INTERSECTION_SCHEMA = TrajectorySchema(
    "intersection",
    {"id": "track_id", "frame": "frame_id", "x": "x", "y": "y",
     "vx": "vx", "vy": "vy", "ax": "ax", "ay": "ay", "heading": "yaw_rad",
     "width": "width", "length": "length", "class": "agent_type"},
    {"x": "m", "y": "m", "vx": "m/s", "vy": "m/s", "heading": "rad"})

SCHEMAS = {s.name: s for s in (CANONICAL_SCHEMA, AERIAL_HIGHWAY_SCHEMA,
                               INTERSECTION_SCHEMA)}


@dataclass(frozen=True)
class ActorRecord:
    id: str
    cls: str
    x: float
    y: float
    heading: float
    vx: float
    vy: float
    ax: float
    ay: float
    width: float
    length: float
    decision: Optional[str] = None


@dataclass
class Recording:
    """An immutable-after-load trajectory fragment."""

    rate_hz: float
    fragment_id: str
    frames: dict[int, list[ActorRecord]]                 # frame index -> actors
    lights: dict[int, list[tuple[float, str]]] = field(default_factory=dict)

    @property
    def period(self) -> float:
        return 1.0 / self.rate_hz

    def frame_indices(self) -> list[int]:
        return sorted(self.frames)

    def actor_ids(self) -> list[str]:
        seen: dict[str, None] = {}
        for idx in self.frame_indices():
            for a in self.frames[idx]:
                seen.setdefault(a.id, None)
        return list(seen)

    def vehicle_ids(self) -> list[str]:
        return [a for a in self.actor_ids() if not self._is_pedestrian(a)]

    def _is_pedestrian(self, actor_id: str) -> bool:
        for idx in self.frame_indices():
            for a in self.frames[idx]:
                if a.id == actor_id:
                    return a.cls == "pedestrian"
        return False

    def light_state(self, road_id: int, t: float) -> Optional[str]:
        timeline = self.lights.get(road_id)
        if not timeline:
            return None
        state = None
        for t0, s in timeline:
            if t0 <= t:
                state = s
            else:
                break
        return state


def load_trajectories(path: str, schema: TrajectorySchema,
                      rate_hz: float = 25.0,
                      lights: Optional[dict[int, list[tuple[float, str]]]] = None
                      ) -> Recording:
    """Load a trajectory CSV into a canonical-unit :class:`Recording`."""
    df = pd.read_csv(path)
    missing_cols = [src for f, src in schema.columns.items()
                    if f in MANDATORY_FIELDS and src not in df.columns]
    if missing_cols:
        canonical = [f for f in MANDATORY_FIELDS
                     if schema.columns[f] in missing_cols]
        raise SchemaError(f"{path}: missing column(s) "
                          + ", ".join(f"{schema.columns[f]!r} (field {f!r})"
                                      for f in canonical))
    out: dict[str, pd.Series] = {}
    for f, src in schema.columns.items():
        if src not in df.columns:
            continue
        col = df[src]
        if f not in ("id", "class", "decision"):
            col = pd.to_numeric(col, errors="coerce")
            bad = col.index[col.isna() & df[src].notna()]
            if len(bad):
                raise SchemaError(f"{path}: row {bad[0] + 2}: unparseable number "
                                  f"in column {src!r}")
            col = col * _UNIT_FACTORS.get(schema.units.get(f, "m"), 1.0)
        out[f] = col
    data = pd.DataFrame(out)
    for f in MANDATORY_FIELDS:
        na = data.index[data[f].isna()]
        if len(na):
            raise SchemaError(f"{path}: row {na[0] + 2}: missing mandatory "
                              f"field {f!r}")

    data["frame"] = data["frame"].astype(int)
    for actor_id, grp in data.groupby("id", sort=False):
        fr = grp["frame"].to_numpy()
        if np.any(np.diff(fr) <= 0):
            raise SchemaError(f"{path}: non-monotone frame index for actor {actor_id!r}")
    if "ax" not in data.columns or data["ax"].isna().all():
        data = _finite_difference_accel(data, rate_hz)

    frames: dict[int, list[ActorRecord]] = {}
    for row in data.to_dict("records"):
        def num(f, default=0.0):
            v = row.get(f)
            return float(v) if v is not None and v == v else default
        decision = row.get("decision")
        if decision is not None and decision != decision:  # NaN
            decision = None
        rec = ActorRecord(
            id=str(row["id"]), cls=str(row.get("class") or "car"),
            x=num("x"), y=num("y"), heading=num("heading"),
            vx=num("vx"), vy=num("vy"), ax=num("ax"), ay=num("ay"),
            width=num("width"), length=num("length"),
            decision=str(decision) if decision is not None else None)
        frames.setdefault(int(row["frame"]), []).append(rec)
    return Recording(rate_hz, path, frames, lights or {})


def _finite_difference_accel(data: pd.DataFrame, rate_hz: float) -> pd.DataFrame:
    """Three-point finite-difference accelerations from velocities."""
    data = data.copy()
    data["ax"] = 0.0
    data["ay"] = 0.0
    dt = 1.0 / rate_hz
    for _, grp in data.groupby("id", sort=False):
        idx = grp.index
        for v, a in (("vx", "ax"), ("vy", "ay")):
            vals = grp[v].to_numpy(float)
            if len(vals) >= 2:
                data.loc[idx, a] = np.gradient(vals, dt)
    return data


# ---------------------------------------------------------------------------
# Maps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HighwayMap:
    lanes: tuple[LaneGeometry, ...]
    n_mainway_lanes: int


def load_map(path: str) -> Union[HighwayMap, IntersectionMap]:
    """Load a highway or intersection map JSON, validating geometry."""
    with open(path) as f:
        try:
            raw = json.load(f)
        except json.JSONDecodeError as e:
            raise MapError(f"{path}: invalid JSON at line {e.lineno}, "
                           f"column {e.colno}: {e.msg}") from e
    kind = raw.get("type")
    if kind == "highway":
        return _load_highway_map(path, raw)
    if kind == "intersection":
        return _load_intersection_map(path, raw)
    raise MapError(f"{path}: map 'type' must be 'highway' or 'intersection'")


def load_light_phases(path: str) -> dict[int, list[tuple[float, str]]]:
    """Optional per-road light-phase timelines from an intersection map JSON.

    Format: ``"light_phases": {"<road_id>": [[t_seconds, "R"|"G"|"Y"], ...]}``
    with each timeline sorted by time; returns {} when absent.
    """
    with open(path) as f:
        raw = json.load(f)
    phases = {}
    for road_id, timeline in raw.get("light_phases", {}).items():
        entries = [(float(t), str(s)) for t, s in timeline]
        if entries != sorted(entries, key=lambda e: e[0]):
            raise MapError(f"{path}: light phases for road {road_id} not sorted")
        phases[int(road_id)] = entries
    return phases


def _load_highway_map(path: str, raw: dict) -> HighwayMap:
    try:
        lines_raw = raw["lane_lines"]
        n_mainway = int(raw["n_mainway_lanes"])
    except KeyError as e:
        raise MapError(f"{path}: missing key {e.args[0]!r}") from e
    lines: dict[int, LaneLine] = {}
    for entry in lines_raw:
        pts = np.asarray(entry["points"], float)
        if pts.ndim != 2 or len(pts) < 2:
            raise MapError(f"{path}: lane line {entry.get('id')}: need >= 2 points")
        deg = min(3, len(pts) - 1)
        coeffs = np.polyfit(pts[:, 0], pts[:, 1], deg)
        coeffs = np.concatenate([np.zeros(3 - deg), coeffs])
        curve = CubicCurve(tuple(coeffs), float(pts[:, 0].min()), float(pts[:, 0].max()))
        lines[int(entry["id"])] = LaneLine(curve, entry.get("line_type", "dashed"))
    ids = sorted(lines)
    if ids != list(range(ids[0], ids[0] + len(ids))):
        raise MapError(f"{path}: lane line ids must be consecutive, got {ids}")
    lanes = tuple(LaneGeometry(i, lines[i], lines[i + 1]) for i in ids[:-1])
    if not lanes:
        raise MapError(f"{path}: need at least two lane lines")
    return HighwayMap(lanes, n_mainway)


def _load_intersection_map(path: str, raw: dict) -> IntersectionMap:
    try:
        width = float(raw["lane_width"])
        area = tuple(tuple(map(float, p)) for p in raw["area"])
        roads_raw = raw["roads"]
    except KeyError as e:
        raise MapError(f"{path}: missing key {e.args[0]!r}") from e

    def lanes_of(entries, road_id):
        return tuple(MapLane(road_id, int(e["lane_id"]),
                             tuple(tuple(map(float, p)) for p in e["centerline"]),
                             float(e.get("width", width)))
                     for e in entries)

    roads = []
    for r in roads_raw:
        rid = int(r["road_id"])
        cw = None
        if r.get("crosswalk"):
            cw = Crosswalk(tuple(tuple(map(float, p)) for p in r["crosswalk"]))
        roads.append(Road(rid, float(r["heading"]),
                          (tuple(map(float, r["stop_line"][0])),
                           tuple(map(float, r["stop_line"][1]))),
                          lanes_of(r.get("entry_lanes", []), rid),
                          lanes_of(r.get("exit_lanes", []), rid), cw))
    try:
        imap = IntersectionMap(tuple(roads), area, width)
    except ValueError as e:
        raise MapError(f"{path}: {e}") from e
    _validate_intersection(path, imap)
    return imap


def _validate_intersection(path: str, imap: IntersectionMap):
    boundary = imap.area_polygon().exterior
    for road in imap.roads:
        for p in road.stop_line:
            if boundary.distance(Point(p)) > 1e-6:
                raise MapError(f"{path}: road {road.road_id} stop line endpoint {p} "
                               "does not lie on the intersection area boundary")
        if road.crosswalk is not None:
            poly = road.crosswalk.polygon()
            if poly.area <= 0:
                raise MapError(f"{path}: road {road.road_id} crosswalk is degenerate")
            if not poly.disjoint(imap.area_polygon()) and \
                    poly.intersection(imap.area_polygon()).area > 1e-6:
                raise MapError(f"{path}: road {road.road_id} crosswalk overlaps "
                               "the intersection area")


# ---------------------------------------------------------------------------
# Replay
# ---------------------------------------------------------------------------

def _vehicle_state(a: ActorRecord) -> VehicleState:
    return VehicleState(a.id, a.x, a.y, a.vx, a.vy, a.heading, a.ax, a.ay,
                        a.width, a.length)


def _vehicle_state_body_vel(a: ActorRecord) -> VehicleState:
    """Global pose with velocities/accelerations rotated into the body frame,
    so vx means longitudinal speed regardless of heading."""
    c, s = math.cos(a.heading), math.sin(a.heading)
    return VehicleState(a.id, a.x, a.y,
                        a.vx * c + a.vy * s, -a.vx * s + a.vy * c,
                        a.heading,
                        a.ax * c + a.ay * s, -a.ax * s + a.ay * c,
                        a.width, a.length)


def replay(recording: Recording, ego_id: str,
           road_map: Union[HighwayMap, IntersectionMap],
           cfg: Optional[ThresholdConfig] = None) -> Iterator[SceneFrame]:
    """Replay a recording as the ego's SceneFrame stream.

    Highway: ego-frame coordinates, lane lines refitted around the ego,
    decisions from the lateral-speed latch (unless the recording carries a
    decision channel).  Intersection: global frame, light phase of the entry
    road attached, decision from entry/exit road ids.
    """
    cfg = cfg or ThresholdConfig()
    present = [idx for idx in recording.frame_indices()
               if any(a.id == ego_id for a in recording.frames[idx])]
    if not present:
        raise KeyError(f"ego id {ego_id!r} not present in recording")
    if isinstance(road_map, HighwayMap):
        yield from _replay_highway(recording, ego_id, road_map, cfg, present)
    else:
        yield from _replay_intersection(recording, ego_id, road_map, cfg, present)


def _split_actors(actors: Sequence[ActorRecord], ego_id: str):
    ego = next(a for a in actors if a.id == ego_id)
    vehicles = [a for a in actors if a.id != ego_id and a.cls != "pedestrian"]
    peds = [a for a in actors if a.cls == "pedestrian"]
    return ego, vehicles, peds


def _replay_highway(recording: Recording, ego_id: str, hmap: HighwayMap,
                    cfg: ThresholdConfig, present: list[int]) -> Iterator[SceneFrame]:
    latch = HighwayDecisionLatch(cfg)
    for idx in present:
        t = idx * recording.period
        ego_rec, veh_recs, ped_recs = _split_actors(recording.frames[idx], ego_id)
        ego_global = _vehicle_state(ego_rec)
        ego, targets = to_ego_frame([_vehicle_state(a) for a in veh_recs], ego_global)
        peds = pedestrian_to_ego_frame(
            [PedestrianState(p.id, p.x, p.y, p.vx, p.vy, p.heading)
             for p in ped_recs], ego_global)
        lanes = _ego_frame_lanes(hmap.lanes, ego_global)
        frame = SceneFrame(t, ego, tuple(targets), tuple(peds), lanes,
                           ROAD_MAINWAY, hmap.n_mainway_lanes, None, None,
                           Decision(GO_STRAIGHT, t))
        if ego_rec.decision:
            decision = Decision(str(ego_rec.decision), t)
        else:
            decision = latch.update(replace(frame, decision=Decision("KeepLane", t)))
        yield replace(frame, decision=decision)


def _ego_frame_lanes(lanes: Sequence[LaneGeometry],
                     ego: VehicleState) -> tuple[LaneGeometry, ...]:
    """Shift lane-line cubics into the ego frame.

    Valid for road-aligned recordings (ego heading ~ 0): the transform is a
    translation of each line's curve, refit over a window around the ego.
    """
    out = []
    for lane in lanes:
        out.append(LaneGeometry(lane.lane_id,
                                _shift_line(lane.left, ego),
                                _shift_line(lane.right, ego)))
    return tuple(out)


def _shift_line(line: LaneLine, ego: VehicleState) -> LaneLine:
    c = line.curve
    # y'(x') = y(x' + ego.x) - ego.y over the shifted domain
    a3, a2, a1, a0 = c.coeffs
    dx, dy = ego.x, ego.y
    coeffs = (a3,
              a2 + 3 * a3 * dx,
              a1 + 2 * a2 * dx + 3 * a3 * dx * dx,
              a0 + a1 * dx + a2 * dx * dx + a3 * dx ** 3 - dy)
    return LaneLine(CubicCurve(coeffs, c.x_min - dx, c.x_max - dx), line.line_type)


def _replay_intersection(recording: Recording, ego_id: str, imap: IntersectionMap,
                         cfg: ThresholdConfig, present: list[int]) -> Iterator[SceneFrame]:
    road_in, road_out, onset = _entry_exit_roads(recording, ego_id, imap, present)
    if road_in is not None and road_out is not None:
        decision = Decision(infer_intersection_decision(road_in, road_out).kind, onset)
    else:
        decision = Decision(GO_STRAIGHT, onset)
    for idx in present:
        t = idx * recording.period
        ego_rec, veh_recs, ped_recs = _split_actors(recording.frames[idx], ego_id)
        if ego_rec.decision:
            frame_decision = Decision(str(ego_rec.decision), t)
        else:
            frame_decision = decision
        light = recording.light_state(road_in, t) if road_in is not None else None
        yield SceneFrame(t, _vehicle_state_body_vel(ego_rec),
                         tuple(_vehicle_state_body_vel(a) for a in veh_recs),
                         tuple(PedestrianState(p.id, p.x, p.y, p.vx, p.vy, p.heading)
                               for p in ped_recs),
                         (), ROAD_INTERSECTION, 0, None, light, frame_decision)


def _entry_exit_roads(recording: Recording, ego_id: str, imap: IntersectionMap,
                      present: list[int]):
    """Entry/exit road ids from the trajectory's endpoints against lane corridors."""
    road_in = road_out = None
    onset = present[0] * recording.period
    for idx in present:
        ego = next(a for a in recording.frames[idx] if a.id == ego_id)
        lane = imap.entry_lane_of(ego.x, ego.y)
        if lane is not None:
            road_in = lane.road_id
            onset = idx * recording.period
        elif road_in is not None and imap.area_polygon().covers(Point(ego.x, ego.y)):
            break
    for idx in reversed(present):
        ego = next(a for a in recording.frames[idx] if a.id == ego_id)
        p = Point(ego.x, ego.y)
        for road in imap.roads:
            for lane in road.exit_lanes:
                if _lane_polygon(lane).covers(p):
                    road_out = road.road_id
                    break
            if road_out is not None:
                break
        if road_out is not None or imap.area_polygon().covers(p):
            break
    return road_in, road_out, onset
