"""Vehicle, pedestrian and lane state plus the calculable scene primitives.

Coordinate conventions: SI units throughout (m, s, m/s, rad).  In the ego
frame the x axis points along the ego heading and y is positive to the
left, so a left lane change has vy > 0.  Lane 1 is the innermost
(leftmost) lane; lane-line ids increase outward, with lane i bounded by
lines i (left) and i+1 (right).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .geometry import (
    CubicCurve,
    Rect,
    Segment,
    rect_polyline_overlap,
    rect_segment_overlap,
    rects_overlap,
    wrap_angle,
)

ROAD_MAINWAY = "M"
ROAD_RAMP = "R"
ROAD_ACCELERATION = "A"
ROAD_DECELERATION = "D"
ROAD_URBAN = "urban"
ROAD_INTERSECTION = "intersection"

LIGHT_RED = "R"
LIGHT_GREEN = "G"
LIGHT_YELLOW = "Y"

REGIONS = ("front", "front_left", "front_right", "rear", "rear_left", "rear_right")

# decision kinds
KEEP_LANE = "KeepLane"
CHANGE_LEFT = "ChangeLeftlane"
CHANGE_RIGHT = "ChangeRightlane"
OVERTAKE = "Overtake"
GO_STRAIGHT = "GoStraight"
TURN_LEFT = "TurnLeft"
TURN_RIGHT = "TurnRight"

HIGHWAY_DECISIONS = (KEEP_LANE, CHANGE_LEFT, CHANGE_RIGHT, OVERTAKE)
INTERSECTION_DECISIONS = (GO_STRAIGHT, TURN_LEFT, TURN_RIGHT)


class OffRoad(Exception):
    """Raised when an object has no bracketing lane."""


@dataclass(frozen=True)
class Decision:
    kind: str
    onset: float = 0.0


@dataclass(frozen=True)
class VehicleState:
    id: str
    x: float
    y: float
    vx: float
    vy: float
    heading: float = 0.0
    ax: float = 0.0
    ay: float = 0.0
    width: float = 1.8
    length: float = 4.5

    def __post_init__(self):
        if self.width <= 0 or self.length <= 0:
            raise ValueError(f"vehicle {self.id}: non-positive dimensions")
        # a sum of finite floats is finite; any nan/inf operand poisons it
        if not math.isfinite(self.x + self.y + self.vx + self.vy
                             + self.ax + self.ay + self.heading):
            raise ValueError(f"vehicle {self.id}: non-finite kinematic field")

    def rect(self) -> Rect:
        return Rect.from_pose(self.x, self.y, self.heading, self.length, self.width)

    def front_midpoint(self) -> tuple[float, float]:
        h = self.length / 2.0
        return (self.x + h * math.cos(self.heading), self.y + h * math.sin(self.heading))

    def rear_midpoint(self) -> tuple[float, float]:
        h = self.length / 2.0
        return (self.x - h * math.cos(self.heading), self.y - h * math.sin(self.heading))


@dataclass(frozen=True)
class PedestrianState:
    id: str
    x: float
    y: float
    vx: float = 0.0
    vy: float = 0.0
    heading: float = 0.0


@dataclass(frozen=True)
class LaneLine:
    curve: CubicCurve
    line_type: str = "dashed"  # solid | dashed


@dataclass(frozen=True)
class LaneGeometry:
    lane_id: int
    left: LaneLine
    right: LaneLine

    def __post_init__(self):
        if self.lane_id < 1:
            raise ValueError("lane_id must be >= 1")


@dataclass(frozen=True)
class SpeedSignContext:
    v_min_kmh: float
    v_max_kmh: float
    active: bool = True


@dataclass(frozen=True)
class SceneFrame:
    """One timestamped snapshot of everything the monitors consume."""

    timestamp: float
    ego: VehicleState
    targets: tuple[VehicleState, ...] = ()
    pedestrians: tuple[PedestrianState, ...] = ()
    lanes: tuple[LaneGeometry, ...] = ()
    road_type: str = ROAD_MAINWAY
    n_mainway_lanes: int = 1
    speed_sign: Optional[SpeedSignContext] = None
    traffic_light: Optional[str] = None
    decision: Decision = Decision(KEEP_LANE)


@dataclass(frozen=True)
class RegionAssignment:
    """Nearest target per ego-relative region (None when empty)."""

    front: Optional[VehicleState] = None
    front_left: Optional[VehicleState] = None
    front_right: Optional[VehicleState] = None
    rear: Optional[VehicleState] = None
    rear_left: Optional[VehicleState] = None
    rear_right: Optional[VehicleState] = None

    def get(self, region: str) -> Optional[VehicleState]:
        return getattr(self, region)


# ---------------------------------------------------------------------------
# Frame transform
# ---------------------------------------------------------------------------

def to_ego_frame(states: Sequence[VehicleState], ego_global: VehicleState) -> tuple[VehicleState, list[VehicleState]]:
    """Express states in the ego frame (ego at origin, heading along +x)."""
    c, s = math.cos(-ego_global.heading), math.sin(-ego_global.heading)

    def rot(x, y):
        return (x * c - y * s, x * s + y * c)

    out = []
    for st in states:
        dx, dy = rot(st.x - ego_global.x, st.y - ego_global.y)
        vx, vy = rot(st.vx, st.vy)
        ax, ay = rot(st.ax, st.ay)
        out.append(VehicleState(st.id, dx, dy, vx, vy,
                                wrap_angle(st.heading - ego_global.heading),
                                ax, ay, st.width, st.length))
    evx, evy = rot(ego_global.vx, ego_global.vy)
    eax, eay = rot(ego_global.ax, ego_global.ay)
    ego = VehicleState(ego_global.id, 0.0, 0.0, evx, evy, 0.0, eax, eay,
                       ego_global.width, ego_global.length)
    return ego, out


def pedestrian_to_ego_frame(peds: Sequence[PedestrianState], ego_global: VehicleState) -> list[PedestrianState]:
    c, s = math.cos(-ego_global.heading), math.sin(-ego_global.heading)
    out = []
    for p in peds:
        dx = (p.x - ego_global.x) * c - (p.y - ego_global.y) * s
        dy = (p.x - ego_global.x) * s + (p.y - ego_global.y) * c
        vx = p.vx * c - p.vy * s
        vy = p.vx * s + p.vy * c
        out.append(PedestrianState(p.id, dx, dy, vx, vy, wrap_angle(p.heading - ego_global.heading)))
    return out


# ---------------------------------------------------------------------------
# Lane membership and regions
# ---------------------------------------------------------------------------

def lane_of(obj: VehicleState, lanes: Sequence[LaneGeometry]) -> int:
    """Lane whose boundary lines bracket the object's center.

    A center exactly on a shared line resolves to the inner (smaller id)
    lane.  Raises :class:`OffRoad` when no lane brackets the center.
    """
    for lane in sorted(lanes, key=lambda ln: ln.lane_id):
        lo, hi = lane.left.curve.x_min, lane.left.curve.x_max
        if not (lo - 1e-9 <= obj.x <= hi + 1e-9):
            continue
        y_left = float(lane.left.curve.y(obj.x))
        y_right = float(lane.right.curve.y(obj.x))
        if y_right <= obj.y <= y_left:
            return lane.lane_id
    raise OffRoad(f"object {obj.id} at ({obj.x:.2f},{obj.y:.2f}) is off the mapped road")


def lane_of_or_none(obj: VehicleState, lanes: Sequence[LaneGeometry]) -> Optional[int]:
    try:
        return lane_of(obj, lanes)
    except OffRoad:
        return None


def lane_line_by_id(lanes: Sequence[LaneGeometry], line_id: int) -> Optional[LaneLine]:
    """Lane line ``i`` is the left boundary of lane ``i`` (ids grow outward)."""
    for lane in lanes:
        if lane.lane_id == line_id:
            return lane.left
    for lane in lanes:
        if lane.lane_id == line_id - 1:
            return lane.right
    return None


def partition_regions(frame: SceneFrame) -> RegionAssignment:
    """Assign each target to one of six ego-relative regions.

    Lateral class comes from lane membership relative to the ego lane;
    targets two or more lanes away, or off-road, are excluded.  Within a
    region the target with the smallest absolute longitudinal gap wins.
    """
    ego_lane = lane_of_or_none(frame.ego, frame.lanes)
    if ego_lane is None:
        return RegionAssignment()
    best: dict[str, tuple[float, VehicleState]] = {}
    for tgt in frame.targets:
        tgt_lane = lane_of_or_none(tgt, frame.lanes)
        if tgt_lane is None:
            continue
        offset = tgt_lane - ego_lane
        if abs(offset) >= 2:
            continue
        lateral = {0: "", -1: "_left", 1: "_right"}[offset]
        gap = distance_longitudinal(frame.ego, tgt) if tgt.x >= frame.ego.x \
            else distance_longitudinal(tgt, frame.ego)
        region = ("front" if tgt.x >= frame.ego.x else "rear") + lateral
        if region not in best or abs(gap) < abs(best[region][0]):
            best[region] = (gap, tgt)
    return RegionAssignment(**{r: v[1] for r, v in best.items()})


# ---------------------------------------------------------------------------
# Distances, TTC, overlap, inclination
# ---------------------------------------------------------------------------

def distance_longitudinal(rear: VehicleState, front: VehicleState) -> float:
    """Bumper-to-bumper longitudinal gap; negative when bodies overlap."""
    return (front.x - rear.x) - (rear.length + front.length) / 2.0


def ttcx(rear: VehicleState, front: VehicleState) -> float:
    """Time to longitudinal collision: bumper gap over closing speed."""
    gap = distance_longitudinal(rear, front)
    if gap < 0:
        return 0.0
    closing = rear.vx - front.vx
    if closing <= 0:
        return math.inf
    return gap / closing


def diff_speed(a: VehicleState, b: VehicleState) -> float:
    return a.vx - b.vx


def incln(heading: float, centerline_heading: float) -> float:
    """Signed heading deviation from a lane centerline, ccw positive."""
    return wrap_angle(heading - centerline_heading)


def overlap(a, b, step: float = 0.1) -> bool:
    """Overlap test across the geometry kinds the monitors use.

    Accepts :class:`Rect`, :class:`Segment`, :class:`CubicCurve`,
    :class:`LaneLine` and :class:`VehicleState` (treated as its footprint
    rectangle).  Rectangle-curve overlap samples the cubic every ``step``
    meters across the rectangle's longitudinal extent.
    """
    a = _as_geom(a)
    b = _as_geom(b)
    if isinstance(a, (CubicCurve,)) and not isinstance(b, CubicCurve):
        a, b = b, a
    if isinstance(a, Segment) and isinstance(b, Rect):
        a, b = b, a
    if isinstance(a, Rect) and isinstance(b, Rect):
        return rects_overlap(a, b)
    if isinstance(a, Rect) and isinstance(b, Segment):
        return rect_segment_overlap(a, b)
    if isinstance(a, Rect) and isinstance(b, CubicCurve):
        xs = [p[0] for p in a.corners]
        pts = b.sample(step, lo=min(xs) - step, hi=max(xs) + step)
        return rect_polyline_overlap(a, pts)
    if isinstance(a, Segment) and isinstance(b, Segment):
        from .geometry import segments_intersect
        return segments_intersect(a.p1, a.p2, b.p1, b.p2)
    raise TypeError(f"unsupported overlap operands: {type(a).__name__}, {type(b).__name__}")


def _as_geom(g):
    if isinstance(g, VehicleState):
        return g.rect()
    if isinstance(g, LaneLine):
        return g.curve
    return g
