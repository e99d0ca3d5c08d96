"""Highway monitoring walkthrough: speeding, tailgating, an unsafe lane
change, and a fully compliant overtake, all on synthetic scenes.

    python3 demos/demo_highway.py
"""

from lawmonitor.config import KMH_TO_MPS, ThresholdConfig
from lawmonitor.geometry import CubicCurve
from lawmonitor.highway import HighwayMonitor
from lawmonitor.world import (CHANGE_LEFT, KEEP_LANE, OVERTAKE, Decision,
                              LaneGeometry, LaneLine, ROAD_MAINWAY,
                              SceneFrame, VehicleState)

DT = 0.04
LANE_W = 3.75
N_LANES = 3


def lanes():
    lines = [LaneLine(CubicCurve((0.0, 0.0, 0.0, N_LANES * LANE_W - i * LANE_W),
                                 -3000.0, 3000.0), "dashed")
             for i in range(N_LANES + 1)]
    return tuple(LaneGeometry(i + 1, lines[i], lines[i + 1])
                 for i in range(N_LANES))


def center_y(lane):
    return N_LANES * LANE_W - (lane - 0.5) * LANE_W


def frame(t, ego, targets=(), decision=KEEP_LANE, onset=0.0):
    return SceneFrame(t, ego, tuple(targets), (), lanes(), ROAD_MAINWAY,
                      N_LANES, None, None, Decision(decision, onset))


def show(title, mon):
    print(f"\n--- {title} ---")
    if not mon.events and not mon.advisories:
        print("  no violations, no advisories")
    for e in mon.events:
        print(f"  VIOLATION  article {e.article}/{e.sub_rule}"
              f"  t=[{e.t_start:.2f}, {e.t_end:.2f}] s  {e.evidence}")
    for a in mon.advisories:
        print(f"  advisory   article {a.article}/{a.sub_rule}"
              f"  t=[{a.t_start:.2f}, {a.t_end:.2f}] s  {a.evidence}")


def run(frames, ego_id):
    mon = HighwayMonitor(ego_id, ThresholdConfig())
    for f in frames:
        mon.step(f)
    mon.finish()
    return mon


def main():
    kmh = lambda v: v * KMH_TO_MPS

    # 1. Speeding: lane 1 requires at least 110 km/h; this ego slows to 104.
    frames = []
    for i in range(51):
        t = i * DT
        v = kmh(112.0 - 4.0 * t)
        frames.append(frame(t, VehicleState("slow", v * t, center_y(1), v, 0.0)))
    show("lane-1 vehicle decelerating below the 110 km/h minimum",
         run(frames, "slow"))

    # 2. Tailgating: below 100 km/h the required bumper gap is 50 m.
    frames = []
    v = kmh(70.24)
    for i in range(51):
        t = i * DT
        ego = VehicleState("tail", v * t, center_y(3), v, 0.0)
        front = VehicleState("lead", ego.x + 8.12 + 4.5, ego.y, v, 0.0)
        frames.append(frame(t, ego, [front]))
    show("8.12 m gap at 70 km/h (50 m required)", run(frames, "tail"))

    # 3. Unsafe lane change: a vehicle 13 m behind in the target lane is
    #    inside the 14 m rear clearance envelope.
    frames = []
    v = kmh(100.0)
    for i in range(90):
        t = i * DT
        changing = t >= 1.0
        y = min(center_y(3) + (1.5 * (t - 1.0) if changing else 0.0), center_y(2))
        ego = VehicleState("lc", v * t, y, v, 1.5 if changing else 0.0)
        rear = VehicleState("R", ego.x - 17.5, center_y(2), v, 0.0)
        frames.append(frame(t, ego, [rear],
                            decision=CHANGE_LEFT if changing else KEEP_LANE,
                            onset=1.0 if changing else t))
    show("left change with a vehicle 13 m back in the target lane",
         run(frames, "lc"))

    # 4. Compliant overtake: out at +1.5 m/s, past a 70 km/h vehicle, back in.
    #    Only the speed-recommendation advisory fires; no violations.
    v_ego, v_tgt = kmh(95), kmh(70)
    frames = []
    for i in range(int(18.0 / DT) + 1):
        t = i * DT
        if t < 1.0:
            y, vy = center_y(3), 0.0
        elif t < 3.5:
            y, vy = center_y(3) + 1.5 * (t - 1.0), 1.5
        elif t < 14.0:
            y, vy = center_y(2), 0.0
        elif t < 17.0:
            y, vy = center_y(2) - 1.25 * (t - 14.0), -1.25
        else:
            y, vy = center_y(3), 0.0
        ego = VehicleState("ot", v_ego * t, y, v_ego, vy)
        slowpoke = VehicleState("S", 81.44 + v_tgt * t, center_y(3), v_tgt, 0.0)
        active = 1.0 <= t <= 17.2
        frames.append(frame(t, ego, [slowpoke],
                            decision=OVERTAKE if active else KEEP_LANE,
                            onset=1.0 if active else t))
    mon = run(frames, "ot")
    show("textbook overtake (stage claims the shared checks)", mon)
    once = all(c.get("on_line", 0) <= 1 and c.get("regions", 0) <= 1
               for c in mon.frame_compute_counts)
    print(f"  shared checks computed at most once per frame: {once}")


if __name__ == "__main__":
    main()
