"""Data-driven threshold extraction from highway recordings.

Three thresholds are recovered from observed lane-change behavior:
the minimum safe cut-in distance (gap histogram crossover against a
deceleration dividing line), the maximum tolerated line-overlap time
(Beta-distribution coverage quantile of overlap durations), and the
minimum time-to-collision (crossing point of the fitted duration/TTC
ratio curve).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from .config import ThresholdConfig
from .dataset import HighwayMap, Recording, replay
from .world import lane_of_or_none, partition_regions, ttcx


class CalibrationError(ValueError):
    """Calibration precondition or fit failure."""


MIN_EVENTS = 30
REAR_WINDOW_M = 30.0


@dataclass(frozen=True)
class LaneChangeEvent:
    """One maximal line-overlap episode that completed a lane change."""

    ego_id: str
    t_start: float
    t_end: float
    duration_s: float
    rear_gap_m: Optional[float] = None          # target-lane rear gap at onset
    rear_decel_mps2: Optional[float] = None     # rear target's mean deceleration
    front_ttc_s: Optional[float] = None         # front-target TTC at onset

    def __post_init__(self):
        if self.duration_s <= 0:
            raise ValueError("lane-change duration must be positive")

    @property
    def ratio(self) -> Optional[float]:
        """Overlap duration over initial front TTC."""
        if self.front_ttc_s is None or self.front_ttc_s <= 0:
            return None
        return self.duration_s / self.front_ttc_s


def extract_lane_change_events(recording: Recording, hmap: HighwayMap,
                               cfg: Optional[ThresholdConfig] = None
                               ) -> list[LaneChangeEvent]:
    """All completed lane changes in a recording, one event per overlap run.

    An episode counts only when the lane index after the overlap differs
    from the lane index before it; rear-gap and deceleration fields are
    populated when a target-lane rear vehicle sits within 30 m at onset.
    """
    cfg = cfg or ThresholdConfig()
    events: list[LaneChangeEvent] = []
    for ego_id in recording.vehicle_ids():
        events.extend(_events_for_ego(recording, hmap, cfg, ego_id))
    return events


def _events_for_ego(recording: Recording, hmap: HighwayMap,
                    cfg: ThresholdConfig, ego_id: str) -> list[LaneChangeEvent]:
    from .world import lane_line_by_id, overlap

    events = []
    run = None  # {"start", "lane_before", "onset_frame", "decels": []}
    prev_lane = None
    for frame in replay(recording, ego_id, hmap, cfg):
        lane = lane_of_or_none(frame.ego, frame.lanes)
        on_line = False
        if lane is not None:
            for line_id in (lane, lane + 1):
                line = lane_line_by_id(frame.lanes, line_id)
                if line is not None and overlap(frame.ego, line,
                                                cfg.curve_sample_step_m):
                    on_line = True
                    break
        if on_line and run is None:
            run = {"start": frame.timestamp, "lane_before": prev_lane or lane,
                   "onset": _onset_neighbors(frame, cfg), "decels": []}
        if run is not None:
            rear_id = run["onset"].get("rear_id")
            if rear_id is not None:
                for tgt in frame.targets:
                    if tgt.id == rear_id:
                        run["decels"].append(-tgt.ax)
        if not on_line and run is not None:
            if lane is not None and run["lane_before"] is not None \
                    and lane != run["lane_before"]:
                onset = run["onset"]
                decel = float(np.mean(run["decels"])) if run["decels"] else None
                events.append(LaneChangeEvent(
                    ego_id, run["start"], frame.timestamp,
                    frame.timestamp - run["start"],
                    rear_gap_m=onset.get("rear_gap"),
                    rear_decel_mps2=decel,
                    front_ttc_s=onset.get("front_ttc")))
            run = None
        if lane is not None and not on_line:
            prev_lane = lane
    return events


def _onset_neighbors(frame, cfg: ThresholdConfig) -> dict:
    """Rear-gap / front-TTC context captured at line-overlap onset."""
    from .world import distance_longitudinal

    regions = partition_regions(frame)
    out: dict = {}
    side = "left" if frame.ego.vy >= 0 else "right"
    rear = regions.get(f"rear_{side}")
    if rear is not None:
        gap = distance_longitudinal(rear, frame.ego)
        if 0 <= gap <= REAR_WINDOW_M:
            out["rear_id"] = rear.id
            out["rear_gap"] = gap
    if regions.front is not None:
        t = ttcx(frame.ego, regions.front)
        if math.isfinite(t):
            out["front_ttc"] = t
    return out


# ---------------------------------------------------------------------------
# Threshold fits
# ---------------------------------------------------------------------------

@dataclass
class CalibrationResult:
    d_clmin_m: Optional[float] = None
    t_max_cl_s: Optional[float] = None
    ttcx_min_s: Optional[float] = None
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"d_clmin_m": self.d_clmin_m, "t_max_cl_s": self.t_max_cl_s,
                "ttcx_min_s": self.ttcx_min_s, "details": self.details}

    def save(self, path: str):
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)

    def apply_to(self, cfg: ThresholdConfig) -> ThresholdConfig:
        d = cfg.to_dict()
        for k in ("d_clmin_m", "t_max_cl_s", "ttcx_min_s"):
            v = getattr(self, k)
            if v is not None:
                d[k] = v
        return ThresholdConfig.from_dict(d)


def calibrate_cut_in_distance(events: Sequence[LaneChangeEvent],
                              dividing_deceleration: float = 0.35,
                              bin_width: float = 1.0
                              ) -> tuple[float, dict]:
    """Smallest gap bin at and above which mild rear decelerations dominate.

    Events are binned by rear gap (1 m bins); scanning upward, the first
    bin b where events decelerating below the dividing line outnumber those
    at or above it — cumulatively over bins >= b — is the threshold.
    """
    usable = [e for e in events
              if e.rear_gap_m is not None and e.rear_decel_mps2 is not None]
    if len(usable) < MIN_EVENTS:
        raise CalibrationError(
            f"need >= {MIN_EVENTS} events with rear data, got {len(usable)}")
    gaps = np.array([e.rear_gap_m for e in usable])
    mild = np.array([e.rear_decel_mps2 < dividing_deceleration for e in usable])
    if not mild.any():
        raise CalibrationError("no crossover: every rear vehicle decelerated "
                               "at or above the dividing line")
    bins = np.floor(gaps / bin_width).astype(int)
    histogram = {}
    for b in sorted(set(bins)):
        sel = bins == b
        histogram[float(b * bin_width)] = {
            "mild": int((sel & mild).sum()), "strong": int((sel & ~mild).sum())}
    for b in sorted(set(bins)):
        above = bins >= b
        if (above & mild).sum() > (above & ~mild).sum():
            return float(b * bin_width), {"histogram": histogram,
                                          "dividing_mps2": dividing_deceleration}
    raise CalibrationError("no crossover: strong decelerations dominate at "
                           "every gap bin")


def calibrate_on_line_time(events: Sequence[LaneChangeEvent],
                           coverage: float = 0.9992) -> tuple[float, dict]:
    """Coverage quantile of a Beta fit to line-overlap durations.

    Durations are affinely mapped onto (0,1) over their observed support
    (with a small margin against boundary likelihood singularities) to
    moment-match starting shape parameters; the final maximum-likelihood
    fit frees the support so the extreme quantile is not clipped at the
    sample maximum.
    """
    durations = np.array([e.duration_s for e in events], float)
    if len(durations) < MIN_EVENTS:
        raise CalibrationError(f"need >= {MIN_EVENTS} durations, got {len(durations)}")
    lo, hi = durations.min(), durations.max()
    if hi - lo <= 0:
        raise CalibrationError("degenerate durations: zero variance")
    if coverage >= 1.0:
        return float(hi), {"support_s": [float(lo), float(hi)], "coverage": 1.0}
    eps = 1e-6
    unit = (durations - lo) / (hi - lo) * (1 - 2 * eps) + eps
    m, v = unit.mean(), unit.var()
    common = m * (1 - m) / v - 1 if v > 0 else 1.0
    a0, b0 = max(m * common, 0.1), max((1 - m) * common, 0.1)
    margin = eps * (hi - lo)
    a, b, loc, scale = stats.beta.fit(durations, a0, b0,
                                      loc=lo - margin,
                                      scale=(hi - lo) + 2 * margin)
    value = stats.beta.ppf(coverage, a, b, loc, scale)
    return float(value), {"alpha": float(a), "beta": float(b),
                          "support_s": [float(loc), float(loc + scale)],
                          "coverage": coverage}


def calibrate_ttcx(events: Sequence[LaneChangeEvent]) -> tuple[float, dict]:
    """TTC at which the fitted inverse-law ratio curve crosses one.

    Fits ratio = c / TTC by least squares to (initial front TTC, overlap
    duration / TTC) pairs; the crossing ratio = 1 gives TTC = c.
    """
    pairs = [(e.front_ttc_s, e.ratio) for e in events
             if e.front_ttc_s is not None and e.ratio is not None]
    if len(pairs) < MIN_EVENTS:
        raise CalibrationError(f"need >= {MIN_EVENTS} events with front-TTC data, "
                               f"got {len(pairs)}")
    t = np.array([p[0] for p in pairs])
    r = np.array([p[1] for p in pairs])
    # least squares for r ~ c/t:  c = sum(r/t) / sum(1/t^2)
    c = float(np.sum(r / t) / np.sum(1.0 / t ** 2))
    if (r < 1).all() and c < t.min():
        raise CalibrationError("fit never reaches ratio = 1 within the data range")
    if not (t.min() <= c <= t.max()):
        raise CalibrationError(f"ratio = 1 crossing at {c:.3f} s lies outside the "
                               f"observed TTC range [{t.min():.3f}, {t.max():.3f}]")
    return c, {"model": "ratio = c / TTC", "c": c,
               "ttc_range_s": [float(t.min()), float(t.max())]}


def deceleration_divider_diagnostic(events: Sequence[LaneChangeEvent]) -> float:
    """Optional 2-means split of rear decelerations; a sanity check on the
    configured dividing line, not used by the calibration itself."""
    decels = np.array(sorted(e.rear_decel_mps2 for e in events
                             if e.rear_decel_mps2 is not None))
    if len(decels) < 2:
        raise CalibrationError("not enough deceleration samples")
    split = (decels.min() + decels.max()) / 2.0
    for _ in range(100):
        lo, hi = decels[decels < split], decels[decels >= split]
        if not len(lo) or not len(hi):
            break
        new = (lo.mean() + hi.mean()) / 2.0
        if abs(new - split) < 1e-9:
            break
        split = new
    return float(split)


def calibrate(recording: Recording, hmap: HighwayMap,
              cfg: Optional[ThresholdConfig] = None,
              coverage: float = 0.9992,
              dividing_deceleration: float = 0.35) -> CalibrationResult:
    """Run all three calibrations over one recording; partial results are
    kept when an individual fit lacks data, with the error recorded."""
    events = extract_lane_change_events(recording, hmap, cfg)
    result = CalibrationResult(details={"n_events": len(events)})
    for name, fn in (("d_clmin_m", lambda: calibrate_cut_in_distance(
                          events, dividing_deceleration)),
                     ("t_max_cl_s", lambda: calibrate_on_line_time(events, coverage)),
                     ("ttcx_min_s", lambda: calibrate_ttcx(events))):
        try:
            value, detail = fn()
            setattr(result, name, value)
            result.details[name] = detail
        except CalibrationError as e:
            result.details[name] = {"error": str(e)}
    return result
