"""Intersection monitoring walkthrough on the bundled sample map: a legal
left turn, a red-light crossing, a wide turn leaving the virtual corridor,
and a blocked opposing vehicle.

    python3 demos/demo_intersection.py
"""

import math

from lawmonitor import dataset
from lawmonitor.config import ThresholdConfig
from lawmonitor.intersection import IntersectionMonitor
from lawmonitor.world import Decision, SceneFrame, TURN_LEFT, VehicleState

DT = 0.04
SPEED = 8.0


def left_turn_pose(s):
    """Arc-length pose: 30 m approach on road 1, quarter-circle left turn
    (radius 13.75 m), then the exit lane of road 4."""
    r, c = 13.75, (-12.0, -12.0)
    if s < 18:
        return 1.75, -30 + s, math.pi / 2
    if s < 18 + r * math.pi / 2:
        a = (s - 18) / r
        return c[0] + r * math.cos(a), c[1] + r * math.sin(a), math.pi / 2 + a
    return -12 - (s - 18 - r * math.pi / 2), 1.75, math.pi


def run(imap, light_fn, pose_fn=left_turn_pose, targets_fn=lambda t: (),
        t_end=6.0):
    mon = IntersectionMonitor("ego", imap, ThresholdConfig())
    t = 0.0
    while t <= t_end:
        x, y, h = pose_fn(SPEED * t)
        ego = VehicleState("ego", x, y, SPEED, 0.0, h)
        mon.step(SceneFrame(t, ego, tuple(targets_fn(t)), (), (),
                            "intersection", 0, None, light_fn(t),
                            Decision(TURN_LEFT, 0.0)))
        t += DT
    mon.finish()
    return mon


def show(title, mon):
    print(f"\n--- {title} ---")
    if not mon.events and not mon.advisories:
        print("  no violations, no advisories")
    for e in mon.events:
        print(f"  VIOLATION  {e.article}/{e.sub_rule}"
              f"  t=[{e.t_start:.2f}, {e.t_end:.2f}] s  {e.evidence}")
    for a in mon.advisories:
        print(f"  advisory   {a.article}/{a.sub_rule}"
              f"  t=[{a.t_start:.2f}, {a.t_end:.2f}] s")


def main():
    imap = dataset.load_map("data/sample_intersection_map.json")
    print(f"loaded map: {len(imap.roads)} roads, "
          f"area half-width {abs(imap.area[0][0]):.1f} m")

    # 1. Legal left turn on green along the exact corridor centerline.
    show("left turn on green, exact arc", run(imap, lambda t: "G"))

    # 2. The same turn against a red light: one IllegalPass the moment the
    #    front bumper crosses the stop line.
    show("left turn on red", run(imap, lambda t: "R"))

    # 3. Swinging wide leaves both the usual and the compliant corridors.
    def wide(s):
        if s < 18:
            return 1.75, -30 + s, math.pi / 2
        d = math.hypot(3.25, 7.0)
        return (1.75 + (s - 18) * 3.25 / d, -12.0 + (s - 18) * 7.0 / d,
                math.atan2(7.0, 3.25))

    show("wide left turn outside the virtual lane", run(imap, lambda t: "G",
                                                        pose_fn=wide))

    # 4. Turning left while an opposing vehicle approaches straight: the
    #    opposing vehicle has the right of way.
    def oncoming(t):
        return [VehicleState("t", -1.75, 10.5, SPEED, 0.0, -math.pi / 2)]

    show("left turn across an oncoming straight vehicle",
         run(imap, lambda t: "G", targets_fn=oncoming))


if __name__ == "__main__":
    main()
