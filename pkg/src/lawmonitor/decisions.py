"""Reconstructing behavioural decisions from trajectories.

Trajectory datasets carry no decision channel.  On highways a lane-change
decision is inferred once lateral speed exceeds 0.25 m/s, upgraded to an
overtake when a slower front vehicle is within 20 s TTC; at intersections
the movement decision follows from the entry and exit road ids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .config import KMH_TO_MPS, ThresholdConfig
from .world import (
    CHANGE_LEFT,
    CHANGE_RIGHT,
    GO_STRAIGHT,
    KEEP_LANE,
    OVERTAKE,
    TURN_LEFT,
    TURN_RIGHT,
    Decision,
    LaneLine,
    SceneFrame,
    lane_line_by_id,
    lane_of_or_none,
    overlap,
    partition_regions,
    ttcx,
)


class UnsupportedDecision(ValueError):
    pass


def infer_intersection_decision(road_in: int, road_out: int) -> Decision:
    """Movement decision from entry/exit road ids in {1..4}."""
    for rid in (road_in, road_out):
        if rid not in (1, 2, 3, 4):
            raise ValueError(f"road id {rid} outside 1..4")
    if road_out == road_in:
        raise UnsupportedDecision(f"U-turn (road {road_in} to itself) is not supported")
    if road_out in (road_in + 2, road_in - 2):
        return Decision(GO_STRAIGHT)
    if road_out in (road_in + 3, road_in - 1):
        return Decision(TURN_LEFT)
    if road_out in (road_in + 1, road_in - 3):
        return Decision(TURN_RIGHT)
    raise UnsupportedDecision(f"no decision maps ({road_in}, {road_out})")


class HighwayDecisionLatch:
    """Online highway decision inference with maneuver latching.

    A raw decision fires on the lateral-speed threshold; once latched it is
    held until the ego settles fully inside one lane (no line overlap) for
    a settling period, or a timeout elapses, so transient vy dips do not
    cancel a maneuver in progress.
    """

    def __init__(self, cfg: Optional[ThresholdConfig] = None):
        self.cfg = cfg or ThresholdConfig()
        self._latched: Optional[Decision] = None
        self._settled_since: Optional[float] = None

    def update(self, frame: SceneFrame) -> Decision:
        raw = self._raw_decision(frame)
        if self._latched is None or self._latched.kind == KEEP_LANE:
            if raw.kind != KEEP_LANE:
                self._latched = Decision(raw.kind, frame.timestamp)
                self._settled_since = None
            else:
                self._latched = raw
            return self._latched

        # maneuver in progress: upgrade lane change to overtake, track settle
        if raw.kind == OVERTAKE and self._latched.kind in (CHANGE_LEFT, CHANGE_RIGHT):
            self._latched = Decision(OVERTAKE, self._latched.onset)
        if self._is_settled(frame):
            if self._settled_since is None:
                self._settled_since = frame.timestamp
            if frame.timestamp - self._settled_since >= self.cfg.decision_latch_settle_s:
                self._latched = None
                return self.update(frame)
        else:
            self._settled_since = None
        if frame.timestamp - self._latched.onset > self.cfg.decision_latch_timeout_s:
            self._latched = None
            return self.update(frame)
        return self._latched

    def _is_settled(self, frame: SceneFrame) -> bool:
        lane = lane_of_or_none(frame.ego, frame.lanes)
        if lane is None:
            return False
        for line_id in (lane, lane + 1):
            line = lane_line_by_id(frame.lanes, line_id)
            if line is not None and overlap(frame.ego, line, self.cfg.curve_sample_step_m):
                return False
        return True

    def _raw_decision(self, frame: SceneFrame) -> Decision:
        cfg = self.cfg
        vy = frame.ego.vy
        if abs(vy) > cfg.lane_change_vy_mps:
            regions = partition_regions(frame)
            front = regions.front
            if front is not None and front.vx < frame.ego.vx and \
                    ttcx(frame.ego, front) < cfg.overtake_decision_ttc_s:
                return Decision(OVERTAKE, frame.timestamp)
            if vy > 0:
                return Decision(CHANGE_LEFT, frame.timestamp)
            return Decision(CHANGE_RIGHT, frame.timestamp)
        return Decision(KEEP_LANE, frame.timestamp)
