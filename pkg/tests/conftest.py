"""Shared fixture builders: highway lane geometry, scene frames, and a
four-road intersection map (optionally rotated for equivariance checks)."""

import json
import math

import pytest

from lawmonitor.geometry import CubicCurve, wrap_angle
from lawmonitor.intersection import Crosswalk, IntersectionMap, MapLane, Road
from lawmonitor.world import (Decision, KEEP_LANE, LaneGeometry, LaneLine,
                              ROAD_MAINWAY, SceneFrame, VehicleState)

LANE_WIDTH = 3.75
N_LANES = 3
TOP_Y = LANE_WIDTH * N_LANES  # leftmost line of lane 1


def straight_line(y, x_min=-3000.0, x_max=3000.0, line_type="dashed"):
    return LaneLine(CubicCurve((0.0, 0.0, 0.0, y), x_min, x_max), line_type)


def highway_lanes(n=N_LANES, width=LANE_WIDTH):
    """n straight lanes; lane 1 innermost (largest y), line i = left of lane i."""
    top = n * width
    lines = [straight_line(top - i * width) for i in range(n + 1)]
    return tuple(LaneGeometry(i + 1, lines[i], lines[i + 1]) for i in range(n))


def lane_center_y(lane_id, n=N_LANES, width=LANE_WIDTH):
    return n * width - (lane_id - 0.5) * width


def make_frame(t, ego, targets=(), lanes=None, n_mainway=N_LANES,
               decision=KEEP_LANE, onset=0.0, road_type=ROAD_MAINWAY,
               speed_sign=None, light=None, pedestrians=()):
    return SceneFrame(t, ego, tuple(targets), tuple(pedestrians),
                      lanes if lanes is not None else highway_lanes(),
                      road_type, n_mainway, speed_sign, light,
                      Decision(decision, onset))


def vehicle(vid, x, y, vx, vy=0.0, heading=0.0, ax=0.0, ay=0.0,
            width=1.8, length=4.5):
    return VehicleState(vid, x, y, vx, vy, heading, ax, ay, width, length)


# ---------------------------------------------------------------------------
# Intersection fixture map
# ---------------------------------------------------------------------------

def _rot(p, quarter_turns):
    x, y = p
    for _ in range(quarter_turns % 4):
        x, y = -y, x
    return (x, y)


def intersection_map(quarter_turns=0, half=12.0, width=3.5,
                     second_exit_road2=False):
    """Square four-road intersection; rotation shifts road ids by the same
    quarter turns so geometry and labeling stay consistent."""
    q = quarter_turns

    def rid(i):
        return (i - 1 + q) % 4 + 1

    def lane(road, lid, pts):
        return MapLane(rid(road), lid, tuple(_rot(p, q) for p in pts), width)

    specs = {
        1: dict(heading=math.pi / 2, stop=((0, -half), (width, -half)),
                entry=[[(1.75, -60), (1.75, -half)]],
                exit=[[(-1.75, -half), (-1.75, -60)]],
                cw=((-5.25, -16), (5.25, -16), (5.25, -12.5), (-5.25, -12.5))),
        2: dict(heading=math.pi, stop=((half, 0), (half, width)),
                entry=[[(60, 1.75), (half, 1.75)]],
                exit=[[(half, -1.75), (60, -1.75)]],
                cw=None),
        3: dict(heading=-math.pi / 2, stop=((-width, half), (0, half)),
                entry=[[(-1.75, 60), (-1.75, half)]],
                exit=[[(1.75, half), (1.75, 60)]],
                cw=None),
        4: dict(heading=0.0, stop=((-half, -width), (-half, 0)),
                entry=[[(-60, -1.75), (-half, -1.75)]],
                exit=[[(-half, 1.75), (-60, 1.75)]],
                cw=None),
    }
    if second_exit_road2:
        specs[2]["exit"].append([(half, -5.25), (60, -5.25)])
    roads = []
    for i, s in specs.items():
        cw = None
        if s["cw"] is not None:
            cw = Crosswalk(tuple(_rot(p, q) for p in s["cw"]))
        roads.append(Road(
            rid(i), wrap_angle(s["heading"] + q * math.pi / 2),
            (_rot(s["stop"][0], q), _rot(s["stop"][1], q)),
            tuple(lane(i, j + 1, pts) for j, pts in enumerate(s["entry"])),
            tuple(lane(i, j + 1, pts) for j, pts in enumerate(s["exit"])),
            cw))
    area = tuple(_rot(p, q) for p in
                 ((-half, -half), (half, -half), (half, half), (-half, half)))
    return IntersectionMap(tuple(roads), area, width)


def left_turn_pose(s, quarter_turns=0):
    """Arc-length pose along the exact road-1 -> road-4 left-turn arc,
    starting 30 m before the stop line."""
    r, c = 13.75, (-12.0, -12.0)
    if s < 18:
        x, y, h = 1.75, -30 + s, math.pi / 2
    elif s < 18 + r * math.pi / 2:
        a = (s - 18) / r
        x, y, h = c[0] + r * math.cos(a), c[1] + r * math.sin(a), math.pi / 2 + a
    else:
        x, y, h = -12 - (s - 18 - r * math.pi / 2), 1.75, math.pi
    x, y = _rot((x, y), quarter_turns)
    return x, y, h + quarter_turns * math.pi / 2


def textbook_overtake_frames(dt=0.04, t_end=18.0):
    """Fully compliant overtake script: lane 3 -> lane 2 -> lane 3 at 95 km/h
    past a 70 km/h vehicle, with the overtake decision active 1.0-17.2 s."""
    from lawmonitor.world import OVERTAKE

    v_ego, v_tgt = 95.0 / 3.6, 70.0 / 3.6
    frames = []
    n = int(round(t_end / dt)) + 1
    for i in range(n):
        t = i * dt
        if t < 1.0:
            y, vy = lane_center_y(3), 0.0
        elif t < 3.5:
            y, vy = lane_center_y(3) + 1.5 * (t - 1.0), 1.5
        elif t < 14.0:
            y, vy = lane_center_y(2), 0.0
        elif t < 17.0:
            y, vy = lane_center_y(2) - 1.25 * (t - 14.0), -1.25
        else:
            y, vy = lane_center_y(3), 0.0
        ego = vehicle("ego", v_ego * t, y, v_ego, vy=vy)
        tgt = vehicle("S", 81.44 + v_tgt * t, lane_center_y(3), v_tgt)
        decision = OVERTAKE if 1.0 <= t <= 17.2 else KEEP_LANE
        frames.append(make_frame(t, ego, [tgt], decision=decision,
                                 onset=1.0 if decision == OVERTAKE else t))
    return frames


@pytest.fixture
def lanes3():
    return highway_lanes()


@pytest.fixture
def imap():
    return intersection_map()
