"""Highway law monitoring: speed, following distance, lane-line occupancy,
lane changes and the three-stage overtake.

The checks are layered: the overtake monitor reuses the lane-change check,
which reuses the on-line timer, and each shared check is computed at most
once per frame.  Violations are reported at the highest active layer, so
an unsafe lane change during an overtake yields one overtake event rather
than a duplicate lane-change event.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

from .config import KMH_TO_MPS, ThresholdConfig
from .events import (
    ARTICLE_FOLLOWING,
    ARTICLE_LANE_CHANGE,
    ARTICLE_ON_LINE,
    ARTICLE_OVERTAKE,
    ARTICLE_SPEED,
    EventTracker,
    ViolationEvent,
)
from .world import (
    CHANGE_LEFT,
    CHANGE_RIGHT,
    OVERTAKE,
    ROAD_MAINWAY,
    RegionAssignment,
    SceneFrame,
    VehicleState,
    distance_longitudinal,
    lane_line_by_id,
    lane_of_or_none,
    overlap,
    partition_regions,
    ttcx,
)


# ---------------------------------------------------------------------------
# Article 78: speed limits
# ---------------------------------------------------------------------------

def check_speed_compliance(frame: SceneFrame, cfg: ThresholdConfig) -> tuple[bool, dict]:
    """Speed compliance on the mainway; bounds inclusive on both sides.

    Inside an active speed-sign area the sign's band governs; otherwise the
    global [60,120] km/h band applies together with the lane-specific
    minimum for (lane count, lane id).  The outermost lane carries no
    lane-specific minimum.
    """
    vx_kmh = frame.ego.vx / KMH_TO_MPS
    sign = frame.speed_sign
    if sign is not None and sign.active:
        ok = sign.v_min_kmh <= vx_kmh <= sign.v_max_kmh
        return ok, {"speed_kmh": vx_kmh, "sign_min_kmh": sign.v_min_kmh,
                    "sign_max_kmh": sign.v_max_kmh}
    lane = lane_of_or_none(frame.ego, frame.lanes)
    if lane is not None and lane > frame.n_mainway_lanes:
        raise ValueError(f"lane id {lane} exceeds mainway lane count {frame.n_mainway_lanes}")
    lane_min = cfg.lane_min_kmh(frame.n_mainway_lanes, lane) if lane is not None else None
    min_kmh = cfg.global_speed_min_kmh if lane_min is None else max(cfg.global_speed_min_kmh, lane_min)
    ok = min_kmh <= vx_kmh <= cfg.global_speed_max_kmh
    return ok, {"speed_kmh": vx_kmh, "min_kmh": min_kmh, "max_kmh": cfg.global_speed_max_kmh,
                "lane": lane}


# ---------------------------------------------------------------------------
# Article 80: following distance
# ---------------------------------------------------------------------------

def check_following_compliance(frame: SceneFrame, cfg: ThresholdConfig,
                               front: Optional[VehicleState]) -> tuple[bool, dict]:
    """Following-distance compliance; inequalities are strict per the law."""
    if front is None:
        return True, {}
    gap = distance_longitudinal(frame.ego, front)
    vx_kmh = frame.ego.vx / KMH_TO_MPS
    if vx_kmh > cfg.following_fast_threshold_kmh:
        ok = gap > cfg.following_fast_gap_m
        required = cfg.following_fast_gap_m
    else:
        ok = gap > cfg.following_slow_gap_m
        required = cfg.following_slow_gap_m
    return ok, {"gap_m": gap, "required_m": required, "speed_kmh": vx_kmh,
                "front_id": front.id}


# ---------------------------------------------------------------------------
# Article 82.3: lane-line occupancy timer
# ---------------------------------------------------------------------------

class OnLineTimer:
    """Tracks continuous lane-line overlap; fires after t_max_cl (strict >)."""

    def __init__(self, cfg: ThresholdConfig):
        self.cfg = cfg
        self.t_in: Optional[float] = None

    def update(self, frame: SceneFrame) -> tuple[bool, bool, dict]:
        """Returns (trigger, long_time_on_line, evidence)."""
        trigger = self._on_any_line(frame)
        if trigger:
            if self.t_in is None:
                self.t_in = frame.timestamp
            duration = frame.timestamp - self.t_in
            lng = duration > self.cfg.t_max_cl_s
            return True, lng, {"t_in": self.t_in, "duration_s": duration,
                               "t_max_cl_s": self.cfg.t_max_cl_s}
        self.t_in = None
        return False, False, {}

    def _on_any_line(self, frame: SceneFrame) -> bool:
        lane = lane_of_or_none(frame.ego, frame.lanes)
        if lane is None:
            return False
        for line_id in (lane, lane + 1):
            line = lane_line_by_id(frame.lanes, line_id)
            if line is not None and overlap(frame.ego, line, self.cfg.curve_sample_step_m):
                return True
        return False


# ---------------------------------------------------------------------------
# Article 44: lane-change safety envelope
# ---------------------------------------------------------------------------

@dataclass
class LaneChangeResult:
    trigger: bool
    compliant: bool = True
    sub_violations: dict[str, dict] = field(default_factory=dict)


def check_lane_change_compliance(frame: SceneFrame, direction: str,
                                 regions: RegionAssignment, long_on_line: bool,
                                 cfg: ThresholdConfig, *, trigger: bool) -> LaneChangeResult:
    """Safety sub-propositions for a lane change in progress.

    A region check violates when the target exists and either its TTC or
    its bumper gap is at or below the configured thresholds (inclusive).
    The rear check orients TTC from the rear target toward the ego.
    """
    if not trigger:
        return LaneChangeResult(False)
    side = "left" if direction == CHANGE_LEFT else "right"
    subs: dict[str, dict] = {}

    def unsafe(rear: VehicleState, front: VehicleState) -> Optional[dict]:
        t = ttcx(rear, front)
        gap = distance_longitudinal(rear, front)
        if t <= cfg.ttcx_min_s or gap <= cfg.d_clmin_m:
            return {"ttc_s": t, "gap_m": gap, "ttcx_min_s": cfg.ttcx_min_s,
                    "d_clmin_m": cfg.d_clmin_m}
        return None

    checks = [
        ("FrontViolation", regions.front, "front"),
        (f"Rear{side.capitalize()}Violation", regions.get(f"rear_{side}"), "rear"),
        (f"Front{side.capitalize()}Violation", regions.get(f"front_{side}"), "front"),
    ]
    for label, tgt, orientation in checks:
        if tgt is None:
            continue
        ev = unsafe(frame.ego, tgt) if orientation == "front" else unsafe(tgt, frame.ego)
        if ev is not None:
            ev["target_id"] = tgt.id
            subs[label] = ev
    if long_on_line:
        subs["LngTmOnLine"] = {"t_max_cl_s": cfg.t_max_cl_s}
    return LaneChangeResult(True, not subs, subs)


# ---------------------------------------------------------------------------
# Article 47: overtake FSM
# ---------------------------------------------------------------------------

STAGE_IDLE = "idle"
STAGE_1 = "stage1"
STAGE_2 = "stage2"
STAGE_3 = "stage3"


@dataclass
class MonitorState:
    """Per-ego mutable monitor state."""

    overtake_stage: str = STAGE_IDLE
    initial_lane: Optional[int] = None
    overtake_target_id: Optional[str] = None
    overtake_onset: Optional[float] = None
    overtake_completed: bool = False
    prev_decision_kind: Optional[str] = None


class HighwayMonitor:
    """Streaming violation monitor for one ego vehicle on a highway.

    Feed ego-frame :class:`SceneFrame` objects in timestamp order via
    :meth:`step`; call :meth:`finish` to flush open events.  One instance
    per ego stream; instances are independent.
    """

    def __init__(self, ego_id: str, cfg: Optional[ThresholdConfig] = None):
        self.cfg = cfg or ThresholdConfig()
        self.ego_id = ego_id
        self.state = MonitorState()
        self.on_line_timer = OnLineTimer(self.cfg)
        self.tracker = EventTracker(ego_id, self.cfg.debounce_samples)
        self.advisory_tracker = EventTracker(ego_id, 0)
        self.frame_compute_counts: list[dict[str, int]] = []
        self.frame_request_counts: list[dict[str, int]] = []
        self._last_t = -math.inf

    # -- shared-check memoization (layering: compute once per frame) --------

    def _memo(self, key: str, fn: Callable):
        self._requests[key] = self._requests.get(key, 0) + 1
        if key not in self._cache:
            self._computes[key] = self._computes.get(key, 0) + 1
            self._cache[key] = fn()
        return self._cache[key]

    def step(self, frame: SceneFrame) -> dict[tuple[str, str], dict]:
        """Process one frame; returns the violations active on this frame."""
        if frame.timestamp <= self._last_t:
            raise ValueError("non-monotone frame timestamp")
        self._last_t = frame.timestamp
        self._cache: dict = {}
        self._computes: dict[str, int] = {}
        self._requests: dict[str, int] = {}
        active: dict[tuple[str, str], dict] = {}
        advisories: dict[tuple[str, str], dict] = {}

        on_mainway = frame.road_type == ROAD_MAINWAY
        regions = self._memo("regions", lambda: partition_regions(frame))

        # Article 78
        if on_mainway:
            ok, ev = check_speed_compliance(frame, self.cfg)
            if not ok:
                active[(ARTICLE_SPEED, "SpeedViolation")] = ev

        # Article 80
        if on_mainway and regions.front is not None:
            ok, ev = check_following_compliance(frame, self.cfg, regions.front)
            if not ok:
                active[(ARTICLE_FOLLOWING, "FollowingViolation")] = ev

        decision = frame.decision.kind
        overtake_active = decision == OVERTAKE
        lane_change_dir = decision if decision in (CHANGE_LEFT, CHANGE_RIGHT) else None

        if overtake_active:
            self._step_overtake(frame, regions, active, advisories)
        elif lane_change_dir is not None:
            res = self._memo(
                f"lane_change_{lane_change_dir}",
                lambda: self._lane_change(frame, lane_change_dir, regions))
            if res.trigger:
                for label, ev in res.sub_violations.items():
                    active[(ARTICLE_LANE_CHANGE, label)] = ev

        # Article 82.3 emits only when no upper layer claimed the timer result
        _, lng, ev = self._memo("on_line", lambda: self.on_line_timer.update(frame))
        claimed = any(k[1] == "LngTmOnLine" and k[0] != ARTICLE_ON_LINE for k in active)
        if lng and not claimed:
            active[(ARTICLE_ON_LINE, "LngTmOnLine")] = ev

        if self.state.prev_decision_kind == OVERTAKE and not overtake_active:
            self._reset_overtake(frame, advisories,
                                 aborted=not self.state.overtake_completed)
            self.state.overtake_completed = False
        self.state.prev_decision_kind = decision

        self.frame_compute_counts.append(self._computes)
        self.frame_request_counts.append(self._requests)
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

    # -- internals -----------------------------------------------------------

    def _lane_change(self, frame: SceneFrame, direction: str,
                     regions: RegionAssignment) -> LaneChangeResult:
        vy_ok = frame.ego.vy > 0 if direction == CHANGE_LEFT else frame.ego.vy < 0
        lane = lane_of_or_none(frame.ego, frame.lanes)
        boundary = None
        if lane is not None:
            line_id = lane if direction == CHANGE_LEFT else lane + 1
            boundary = lane_line_by_id(frame.lanes, line_id)
        on_boundary = boundary is not None and overlap(frame.ego, boundary,
                                                       self.cfg.curve_sample_step_m)
        trigger = vy_ok and on_boundary
        _, lng, _ = self._memo("on_line", lambda: self.on_line_timer.update(frame))
        return check_lane_change_compliance(frame, direction, regions, lng, self.cfg,
                                            trigger=trigger)

    def _step_overtake(self, frame: SceneFrame, regions: RegionAssignment,
                       active: dict, advisories: dict):
        st = self.state
        cfg = self.cfg
        if st.overtake_completed:
            return
        lane = lane_of_or_none(frame.ego, frame.lanes)
        if st.initial_lane is None:
            st.initial_lane = lane
            st.overtake_onset = frame.timestamp
            st.overtake_stage = STAGE_1
            if regions.front is not None:
                st.overtake_target_id = regions.front.id
        if st.initial_lane is None:
            return
        onset = st.overtake_onset if st.overtake_onset is not None else frame.timestamp
        if frame.timestamp - onset > cfg.overtake_timeout_s:
            self._reset_overtake(frame, advisories, aborted=True)
            return

        initial_line = lane_line_by_id(frame.lanes, st.initial_lane)
        on_initial_line = initial_line is not None and overlap(
            frame.ego, initial_line, cfg.curve_sample_step_m)
        tgt_ot = self._overtake_target(frame)

        # stage 1: changing left out of the initial lane
        if frame.ego.vy > 0 and on_initial_line:
            st.overtake_stage = STAGE_1
            if tgt_ot is not None and initial_line is not None:
                front_overtaking = overlap(tgt_ot, initial_line, cfg.curve_sample_step_m) \
                    and tgt_ot.vy > 0
                if front_overtaking:
                    active[(ARTICLE_OVERTAKE, "FrontOvertaking")] = {"target_id": tgt_ot.id}
            res = self._memo(f"lane_change_{CHANGE_LEFT}",
                             lambda: self._lane_change(frame, CHANGE_LEFT, regions))
            for label, ev in res.sub_violations.items():
                active[(ARTICLE_OVERTAKE, label)] = ev

        # stage 2: alongside in the passing lane
        elif lane == st.initial_lane - 1 and not on_initial_line:
            st.overtake_stage = STAGE_2
            if tgt_ot is not None:
                diff_kmh = (frame.ego.vx - tgt_ot.vx) / KMH_TO_MPS
                satisfied = diff_kmh > cfg.delta_v_ot_kmh
                suppressed = not satisfied and self._speed_limit_conflict(frame, tgt_ot)
                advisories[(ARTICLE_OVERTAKE, "RecommendedSpeed")] = {
                    "diff_kmh": diff_kmh, "delta_v_ot_kmh": cfg.delta_v_ot_kmh,
                    "satisfied": satisfied or suppressed,
                    "speed_limit_conflict": suppressed}

        # stage 3: returning to the initial lane past the target
        if lane is not None and lane == st.initial_lane - 1 and on_initial_line \
                and frame.ego.vy < 0 and tgt_ot is not None \
                and distance_longitudinal(tgt_ot, frame.ego) > 0:
            st.overtake_stage = STAGE_3
            res = self._memo(f"lane_change_{CHANGE_RIGHT}",
                             lambda: self._lane_change_return(frame, regions))
            for label, ev in res.sub_violations.items():
                active[(ARTICLE_OVERTAKE, label)] = ev

        # overtaking on the right is prohibited while still in the initial lane
        if lane == st.initial_lane:
            right_line = lane_line_by_id(frame.lanes, st.initial_lane + 1)
            if right_line is not None and frame.ego.vy < 0 and \
                    overlap(frame.ego, right_line, cfg.curve_sample_step_m):
                active[(ARTICLE_OVERTAKE, "OvertakeonRight")] = {"lane": lane}
            if st.overtake_stage == STAGE_3 and not on_initial_line:
                self._reset_overtake(frame, advisories, aborted=False)
                st.overtake_completed = True

    def _lane_change_return(self, frame: SceneFrame,
                            regions: RegionAssignment) -> LaneChangeResult:
        _, lng, _ = self._memo("on_line", lambda: self.on_line_timer.update(frame))
        return check_lane_change_compliance(frame, CHANGE_RIGHT, regions, lng, self.cfg,
                                            trigger=True)

    def _overtake_target(self, frame: SceneFrame) -> Optional[VehicleState]:
        if self.state.overtake_target_id is None:
            return None
        for tgt in frame.targets:
            if tgt.id == self.state.overtake_target_id:
                return tgt
        return None

    def _speed_limit_conflict(self, frame: SceneFrame, tgt: VehicleState) -> bool:
        limit_kmh = self.cfg.global_speed_max_kmh
        if frame.speed_sign is not None and frame.speed_sign.active:
            limit_kmh = frame.speed_sign.v_max_kmh
        required_kmh = tgt.vx / KMH_TO_MPS + self.cfg.delta_v_ot_kmh
        return required_kmh > limit_kmh

    def _reset_overtake(self, frame: SceneFrame, advisories: dict, aborted: bool):
        if aborted and self.state.overtake_stage != STAGE_IDLE:
            advisories[(ARTICLE_OVERTAKE, "IncompleteOvertake")] = {
                "stage": self.state.overtake_stage}
        self.state.overtake_stage = STAGE_IDLE
        self.state.initial_lane = None
        self.state.overtake_target_id = None
        self.state.overtake_onset = None


def monitor_highway_step(monitor: HighwayMonitor, frame: SceneFrame) -> dict:
    """Functional alias for :meth:`HighwayMonitor.step`."""
    return monitor.step(frame)
