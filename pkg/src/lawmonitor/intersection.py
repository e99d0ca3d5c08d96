"""Signalized-intersection law monitoring.

Covers four rule groups at a four-approach intersection: traffic-light
compliance (crossing the stop line on a non-green light), virtual-lane
following (staying inside the arc/straight corridor joining entry and exit
lanes), motor-vehicle right-of-way (yielding at a virtual stop line to
conflicting flows), and pedestrian avoidance at crosswalk sub-areas.

All coordinates are global map coordinates; road ids 1..4 are numbered so
that a right turn exits on road ``in+1`` (wrapping), a left turn on
``in+3``, and going straight on ``in+2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from shapely.geometry import LineString, Point, Polygon
from shapely.ops import unary_union

from .config import ThresholdConfig
from .events import ARTICLE_INTERSECTION, EventTracker, ViolationEvent
from .geometry import Segment, rect_segment_overlap, segments_intersect, wrap_angle
from .world import (
    GO_STRAIGHT,
    LIGHT_GREEN,
    LIGHT_RED,
    TURN_LEFT,
    TURN_RIGHT,
    PedestrianState,
    SceneFrame,
    VehicleState,
    incln,
)

VLANE_USUAL = "Usual"
VLANE_UNUSUAL = "Unusual"
VLANE_VIOLATION = "Violation"


def _wrap_road(road_id: int) -> int:
    return (road_id - 1) % 4 + 1


def exit_road_for(road_in: int, decision: str) -> int:
    """Exit road id implied by an entry road and an intersection decision."""
    if decision == GO_STRAIGHT:
        return _wrap_road(road_in + 2)
    if decision == TURN_LEFT:
        return _wrap_road(road_in + 3)
    if decision == TURN_RIGHT:
        return _wrap_road(road_in + 1)
    raise ValueError(f"unsupported intersection decision {decision!r}")


def left_side_road(road_in: int) -> int:
    """Road approaching from the ego's left-hand side."""
    return _wrap_road(road_in - 1)


def opposing_road(road_in: int) -> int:
    return _wrap_road(road_in + 2)


# ---------------------------------------------------------------------------
# Map types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MapLane:
    """An entry or exit lane; centerline points ordered in driving direction."""

    road_id: int
    lane_id: int
    centerline: tuple[tuple[float, float], ...]
    width: float

    def start(self) -> tuple[float, float]:
        return self.centerline[0]

    def end(self) -> tuple[float, float]:
        return self.centerline[-1]

    def heading(self) -> float:
        (x0, y0), (x1, y1) = self.centerline[-2], self.centerline[-1]
        return math.atan2(y1 - y0, x1 - x0)


@dataclass(frozen=True)
class Crosswalk:
    vertices: tuple[tuple[float, float], ...]

    def polygon(self) -> Polygon:
        return Polygon(self.vertices)

    def sub_areas(self, side: float) -> list[Polygon]:
        """Squares of the given side tiled along the crosswalk's long axis."""
        poly = self.polygon()
        rect = poly.minimum_rotated_rectangle
        coords = [np.asarray(c) for c in rect.exterior.coords[:4]]
        v_long = coords[1] - coords[0]
        v_short = coords[3] - coords[0]
        if np.linalg.norm(v_long) < np.linalg.norm(v_short):
            v_long, v_short = v_short, v_long
        length = float(np.linalg.norm(v_long))
        u_long = v_long / length
        u_short = v_short / np.linalg.norm(v_short)
        n = max(1, int(length // side))
        start = coords[0] + u_long * (length - n * side) / 2.0
        subs = []
        for i in range(n):
            p0 = start + u_long * (i * side)
            subs.append(Polygon([tuple(p0), tuple(p0 + u_long * side),
                                 tuple(p0 + u_long * side + u_short * side),
                                 tuple(p0 + u_short * side)]))
        return subs


@dataclass(frozen=True)
class Road:
    road_id: int
    heading: float                     # direction of travel into the intersection
    stop_line: tuple[tuple[float, float], tuple[float, float]]
    entry_lanes: tuple[MapLane, ...]
    exit_lanes: tuple[MapLane, ...]
    crosswalk: Optional[Crosswalk] = None

    def judgement_line(self) -> Segment:
        """Direction-judgement line: across the entry lanes at the stop line."""
        return Segment(self.stop_line[0], self.stop_line[1])


@dataclass(frozen=True)
class IntersectionMap:
    roads: tuple[Road, ...]
    area: tuple[tuple[float, float], ...]
    lane_width: float

    def __post_init__(self):
        if len(self.roads) != 4:
            raise ValueError("intersection map requires exactly four roads")
        ids = sorted(r.road_id for r in self.roads)
        if ids != [1, 2, 3, 4]:
            raise ValueError(f"road ids must be 1..4, got {ids}")

    def road(self, road_id: int) -> Road:
        for r in self.roads:
            if r.road_id == road_id:
                return r
        raise KeyError(road_id)

    def area_polygon(self) -> Polygon:
        return Polygon(self.area)

    def entry_lane_of(self, x: float, y: float) -> Optional[MapLane]:
        """The entry lane whose corridor contains (x, y), if any."""
        p = Point(x, y)
        for road in self.roads:
            for lane in road.entry_lanes:
                if _lane_polygon(lane).covers(p):
                    return lane
        return None


def _lane_polygon(lane: MapLane) -> Polygon:
    return LineString(lane.centerline).buffer(lane.width / 2.0, cap_style="flat")


# ---------------------------------------------------------------------------
# Virtual elements
# ---------------------------------------------------------------------------

def _arc_centerline(p0, h0, p1, h1, step: float = 0.5) -> list[tuple[float, float]]:
    """Centerline from p0 (heading h0) to p1 (heading h1).

    A circular arc when both endpoint radii agree (within 5%); otherwise a
    quadratic Bezier through the tangent intersection.  Straight segment
    when the headings already agree.
    """
    p0 = np.asarray(p0, float)
    p1 = np.asarray(p1, float)
    if abs(wrap_angle(h1 - h0)) < 1e-6:
        n = max(2, int(np.linalg.norm(p1 - p0) / step) + 1)
        return [tuple(p) for p in np.linspace(p0, p1, n)]
    n0 = np.array([-math.sin(h0), math.cos(h0)])
    n1 = np.array([-math.sin(h1), math.cos(h1)])
    # solve p0 + s*n0 = p1 + t*n1 for the common circle center
    a = np.column_stack([n0, -n1])
    try:
        s, t = np.linalg.solve(a, p1 - p0)
        center = p0 + s * n0
        r0, r1 = abs(s), abs(t)
        circular = r0 > 0 and abs(r0 - r1) / max(r0, r1) <= 0.05
    except np.linalg.LinAlgError:
        circular = False
    if circular:
        a0 = math.atan2(p0[1] - center[1], p0[0] - center[0])
        a1 = math.atan2(p1[1] - center[1], p1[0] - center[0])
        sweep = wrap_angle(a1 - a0)
        r = (r0 + r1) / 2.0
        n = max(2, int(abs(sweep) * r / step) + 1)
        angles = a0 + sweep * np.linspace(0.0, 1.0, n)
        return [(center[0] + r * math.cos(a), center[1] + r * math.sin(a))
                for a in angles]
    # Bezier fallback: control point where the two tangent lines meet
    d0 = np.array([math.cos(h0), math.sin(h0)])
    d1 = np.array([math.cos(h1), math.sin(h1)])
    a = np.column_stack([d0, -d1])
    try:
        s, _ = np.linalg.solve(a, p1 - p0)
        ctrl = p0 + s * d0
    except np.linalg.LinAlgError:
        ctrl = (p0 + p1) / 2.0
    n = max(8, int(np.linalg.norm(p1 - p0) / step) + 1)
    ts = np.linspace(0.0, 1.0, n)[:, None]
    pts = (1 - ts) ** 2 * p0 + 2 * (1 - ts) * ts * ctrl + ts ** 2 * p1
    return [tuple(p) for p in pts]


def _corridor(centerline: list[tuple[float, float]], width: float) -> Polygon:
    return LineString(centerline).buffer(width / 2.0, cap_style="flat")


@dataclass
class VirtualElements:
    """Derived geometry for one (entry lane, decision) approach."""

    entry_lane: MapLane
    decision: str
    road_out: int
    usual_centerline: list[tuple[float, float]]
    usual_lane: Polygon
    unusual_lane: Polygon
    # per ego-light context ("red" / "not_red"): conflict geometry, or None
    v_stoplines: dict[str, Optional[Segment]] = field(default_factory=dict)
    check_areas: dict[str, Optional[Polygon]] = field(default_factory=dict)
    conflict_roads: dict[str, Optional[int]] = field(default_factory=dict)

    def light_key(self, light: Optional[str]) -> str:
        return "red" if light == LIGHT_RED else "not_red"


def _conflict_corridors(imap: IntersectionMap, conflict_road: int,
                        conflict_decision: str) -> list[tuple[list, Polygon]]:
    out = []
    for lane in imap.road(conflict_road).entry_lanes:
        try:
            cl = _approach_centerline(imap, lane, conflict_decision)
        except ValueError:
            continue
        out.append((cl, _corridor(cl, lane.width)))
    return out


def _approach_centerline(imap: IntersectionMap, entry_lane: MapLane,
                         decision: str, exit_lane: Optional[MapLane] = None) -> list:
    road_out = exit_road_for(entry_lane.road_id, decision)
    exits = imap.road(road_out).exit_lanes
    if not exits:
        raise ValueError(f"road {road_out} has no exit lanes")
    if exit_lane is None:
        exit_lane = exits[0]
    cl = _arc_centerline(entry_lane.end(), entry_lane.heading(),
                         exit_lane.start(), exit_lane.heading())
    # extend into the entry/exit lanes so corridor caps clear the area boundary
    h_in, h_out = entry_lane.heading(), exit_lane.heading()
    ext = 2.0
    pre = (cl[0][0] - ext * math.cos(h_in), cl[0][1] - ext * math.sin(h_in))
    post = (cl[-1][0] + ext * math.cos(h_out), cl[-1][1] + ext * math.sin(h_out))
    return [pre] + cl + [post]


def build_virtual_elements(imap: IntersectionMap, entry_lane: MapLane,
                           decision: str) -> VirtualElements:
    """Build the virtual lane, stop line and check area for one approach."""
    if decision not in (GO_STRAIGHT, TURN_LEFT, TURN_RIGHT):
        raise ValueError(f"unsupported intersection decision {decision!r}")
    road_out = exit_road_for(entry_lane.road_id, decision)
    exits = imap.road(road_out).exit_lanes
    usual_cl = _approach_centerline(imap, entry_lane, decision, exits[0])
    usual = _corridor(usual_cl, entry_lane.width)
    widen = 0.0
    corridors = [usual.buffer(widen)] if widen else [usual]
    for ex in exits[1:]:
        cl = _approach_centerline(imap, entry_lane, decision, ex)
        corridors.append(_corridor(cl, entry_lane.width))
    unusual = unary_union(corridors)

    elems = VirtualElements(entry_lane, decision, road_out, usual_cl, usual, unusual)
    contexts: dict[str, Optional[tuple[int, str]]] = {"red": None, "not_red": None}
    if decision == TURN_LEFT:
        conflict = (opposing_road(entry_lane.road_id), GO_STRAIGHT)
        contexts = {"red": conflict, "not_red": conflict}
    elif decision == TURN_RIGHT:
        contexts = {"red": (left_side_road(entry_lane.road_id), GO_STRAIGHT),
                    "not_red": (opposing_road(entry_lane.road_id), TURN_LEFT)}
    for key, ctx in contexts.items():
        if ctx is None:
            elems.v_stoplines[key] = None
            elems.check_areas[key] = None
            elems.conflict_roads[key] = None
            continue
        conflict_road, conflict_decision = ctx
        stop, check = _conflict_geometry(
            imap, usual_cl, entry_lane.width,
            _conflict_corridors(imap, conflict_road, conflict_decision))
        elems.v_stoplines[key] = stop
        elems.check_areas[key] = check
        elems.conflict_roads[key] = conflict_road
    return elems


def _conflict_geometry(imap: IntersectionMap, ego_cl: list, width: float,
                       conflicts: list[tuple[list, Polygon]]
                       ) -> tuple[Optional[Segment], Optional[Polygon]]:
    """Virtual stop line on the ego corridor and the conflicting check area."""
    if not conflicts:
        return None, None
    conflict_region = unary_union([c for _, c in conflicts])
    stop = None
    prev = ego_cl[0]
    for i, pt in enumerate(ego_cl):
        if conflict_region.covers(Point(pt)):
            anchor = prev if i > 0 else pt
            j = max(0, i - 1)
            nxt = ego_cl[min(j + 1, len(ego_cl) - 1)]
            h = math.atan2(nxt[1] - anchor[1], nxt[0] - anchor[0])
            nrm = (-math.sin(h), math.cos(h))
            half = width / 2.0
            stop = Segment((anchor[0] - nrm[0] * half, anchor[1] - nrm[1] * half),
                           (anchor[0] + nrm[0] * half, anchor[1] + nrm[1] * half))
            break
        prev = pt
    if stop is None:
        return None, None
    # check area: each conflicting corridor truncated at its own first entry
    # into the mutual conflict zone (upstream portion, back to its stop line)
    ego_corridor = _corridor(ego_cl, width)
    pieces = []
    for cl, _ in conflicts:
        upstream = []
        for pt in cl:
            if ego_corridor.covers(Point(pt)):
                break
            upstream.append(pt)
        if len(upstream) >= 2:
            pieces.append(_corridor(upstream, width))
    if not pieces:
        return stop, None
    return stop, unary_union(pieces)


# ---------------------------------------------------------------------------
# Rule checks
# ---------------------------------------------------------------------------

def check_traffic_light(frame: SceneFrame, imap: IntersectionMap,
                        prev_center_inside: Optional[bool],
                        prev_light: Optional[str]) -> tuple[bool, dict]:
    """IllegalPass: crossing into the intersection area on a non-green light.

    True iff the decision is not a right turn, the previous sample's center
    was outside the area under a non-green light, and the current center is
    inside under a non-green light.
    """
    area = imap.area_polygon()
    inside = area.covers(Point(frame.ego.x, frame.ego.y))
    front_in = area.covers(Point(*frame.ego.front_midpoint()))
    if (inside or front_in) and frame.traffic_light is None:
        raise ValueError("traffic light state required while ego is at the intersection")
    if frame.decision.kind == TURN_RIGHT:
        return False, {}
    crossed = (inside and prev_center_inside is False
               and prev_light is not None and prev_light != LIGHT_GREEN
               and frame.traffic_light != LIGHT_GREEN)
    if crossed:
        return True, {"light": frame.traffic_light, "prev_light": prev_light}
    return False, {}


def check_virtual_lane(frame: SceneFrame, imap: IntersectionMap,
                       elems: VirtualElements) -> str:
    """Classify the ego center against the usual/unusual corridors."""
    if not imap.area_polygon().covers(Point(frame.ego.x, frame.ego.y)):
        return VLANE_USUAL
    p = Point(frame.ego.x, frame.ego.y)
    if elems.usual_lane.covers(p):
        return VLANE_USUAL
    if elems.unusual_lane.covers(p):
        return VLANE_UNUSUAL
    return VLANE_VIOLATION


def _high_right_of_way(tgt: VehicleState, imap: IntersectionMap,
                       conflict_road: int, decision: str, light: Optional[str],
                       cfg: ThresholdConfig) -> bool:
    """Target overlaps the conflict road's judgement line with a heading in
    the decision-appropriate angle range."""
    road = imap.road(conflict_road)
    line = road.judgement_line()
    if not rect_segment_overlap(tgt.rect(), line):
        return False
    dev = abs(incln(tgt.heading, road.heading))
    if decision == TURN_RIGHT and light != LIGHT_RED:
        return cfg.angle_range_tl_lo_rad < dev <= cfg.angle_range_tl_hi_rad
    return dev <= cfg.angle_range_gs_rad


def check_right_of_way(frame: SceneFrame, imap: IntersectionMap,
                       elems: VirtualElements,
                       cfg: ThresholdConfig) -> tuple[bool, dict]:
    """ViolationRightofWay: crossing the virtual stop line while a
    high-right-of-way target occupies the check area, with ego moving."""
    if frame.ego.vx == 0:
        return False, {}
    if not imap.area_polygon().covers(Point(frame.ego.x, frame.ego.y)):
        return False, {}
    key = elems.light_key(frame.traffic_light)
    stop = elems.v_stoplines.get(key)
    check = elems.check_areas.get(key)
    conflict_road = elems.conflict_roads.get(key)
    if stop is None or check is None or conflict_road is None:
        return False, {}
    if not segments_intersect((frame.ego.x, frame.ego.y),
                              frame.ego.front_midpoint(), stop.p1, stop.p2):
        return False, {}
    for tgt in frame.targets:
        if not check.covers(Point(*tgt.front_midpoint())):
            continue
        if _high_right_of_way(tgt, imap, conflict_road, elems.decision,
                              frame.traffic_light, cfg):
            return True, {"target_id": tgt.id, "conflict_road": conflict_road}
    return False, {}


def _direction_into(ped: PedestrianState, area: Polygon,
                    cfg: ThresholdConfig) -> bool:
    speed = math.hypot(ped.vx, ped.vy)
    if speed <= cfg.pedestrian_min_speed_mps:
        return False
    path = LineString([(ped.x, ped.y),
                       (ped.x + ped.vx * cfg.pedestrian_lookahead_s,
                        ped.y + ped.vy * cfg.pedestrian_lookahead_s)])
    return path.intersects(area)


def check_pedestrian(frame: SceneFrame, imap: IntersectionMap,
                     cfg: ThresholdConfig) -> tuple[bool, dict]:
    """ImpedePedestrian: ego nose entering a crosswalk sub-area occupied by a
    pedestrian, or one being approached from an adjacent sub-area."""
    front = Point(*frame.ego.front_midpoint())
    center = Point(frame.ego.x, frame.ego.y)
    for road in imap.roads:
        if road.crosswalk is None:
            continue
        subs = road.crosswalk.sub_areas(imap.lane_width)
        for i, sub in enumerate(subs):
            if not sub.covers(front) or sub.covers(center):
                continue
            for ped in frame.pedestrians:
                p = Point(ped.x, ped.y)
                if sub.covers(p):
                    return True, {"pedestrian_id": ped.id, "sub_area": i}
                for j in (i - 1, i + 1):
                    if 0 <= j < len(subs) and subs[j].covers(p) \
                            and _direction_into(ped, sub, cfg):
                        return True, {"pedestrian_id": ped.id, "sub_area": i,
                                      "from_adjacent": j}
    return False, {}


# ---------------------------------------------------------------------------
# Monitor
# ---------------------------------------------------------------------------

class IntersectionMonitor:
    """Streaming Article-38 monitor for one ego vehicle at an intersection.

    Frames are global-coordinate :class:`SceneFrame` objects in timestamp
    order; the traffic light is the phase facing the ego's entry road.
    """

    def __init__(self, ego_id: str, imap: IntersectionMap,
                 cfg: Optional[ThresholdConfig] = None):
        self.cfg = cfg or ThresholdConfig()
        self.ego_id = ego_id
        self.imap = imap
        self.tracker = EventTracker(ego_id, self.cfg.debounce_samples)
        self.advisory_tracker = EventTracker(ego_id, 0)
        self._prev_center_inside: Optional[bool] = None
        self._prev_light: Optional[str] = None
        self._entry_lane: Optional[MapLane] = None
        self._elems: Optional[VirtualElements] = None
        self._last_t = -math.inf

    def step(self, frame: SceneFrame) -> dict[tuple[str, str], dict]:
        if frame.timestamp <= self._last_t:
            raise ValueError("non-monotone frame timestamp")
        self._last_t = frame.timestamp
        active: dict[tuple[str, str], dict] = {}
        advisories: dict[tuple[str, str], dict] = {}
        area = self.imap.area_polygon()
        center_inside = area.covers(Point(frame.ego.x, frame.ego.y))

        if not center_inside:
            lane = self.imap.entry_lane_of(frame.ego.x, frame.ego.y)
            if lane is not None and lane is not self._entry_lane:
                self._entry_lane = lane
                self._elems = None

        hit, ev = check_traffic_light(frame, self.imap,
                                      self._prev_center_inside, self._prev_light)
        if hit:
            active[(ARTICLE_INTERSECTION, "IllegalPass")] = ev

        decision = frame.decision.kind
        if center_inside and decision in (GO_STRAIGHT, TURN_LEFT, TURN_RIGHT) \
                and self._entry_lane is not None:
            if self._elems is None or self._elems.decision != decision:
                self._elems = build_virtual_elements(self.imap, self._entry_lane,
                                                     decision)
            verdict = check_virtual_lane(frame, self.imap, self._elems)
            if verdict == VLANE_VIOLATION:
                active[(ARTICLE_INTERSECTION, "VirtualLaneViolation")] = {
                    "entry_road": self._entry_lane.road_id, "decision": decision}
            elif verdict == VLANE_UNUSUAL:
                advisories[(ARTICLE_INTERSECTION, "UnusualVirtualLane")] = {
                    "entry_road": self._entry_lane.road_id, "decision": decision}
            hit, ev = check_right_of_way(frame, self.imap, self._elems, self.cfg)
            if hit:
                active[(ARTICLE_INTERSECTION, "ViolationRightofWay")] = ev

        hit, ev = check_pedestrian(frame, self.imap, self.cfg)
        if hit:
            active[(ARTICLE_INTERSECTION, "ImpedePedestrian")] = ev

        self._prev_center_inside = center_inside
        self._prev_light = frame.traffic_light
        self.tracker.observe(frame.timestamp, active)
        self.advisory_tracker.observe(frame.timestamp, advisories)
        return active

    def finish(self):
        self.tracker.finish()
        self.advisory_tracker.finish()

    @property
    def events(self) -> list[ViolationEvent]:
        return self.tracker.events

    @property
    def advisories(self) -> list[ViolationEvent]:
        return self.advisory_tracker.events


def monitor_intersection_step(monitor: IntersectionMonitor, frame: SceneFrame) -> dict:
    """Functional alias for :meth:`IntersectionMonitor.step`."""
    return monitor.step(frame)
