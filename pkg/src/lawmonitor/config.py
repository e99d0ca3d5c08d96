"""Threshold configuration for the monitors and calibration.

Units are explicit in every field name.  Defaults follow the calibrated
values for Chinese highway law monitoring: a 14 m minimum cut-in
distance, a 6 s lane-line occupancy limit and a 2.3 s minimum TTC during
lane changes, with a 15 km/h recommended overtaking speed difference.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional


KMH_TO_MPS = 1.0 / 3.6


@dataclass
class ThresholdConfig:
    # lane change safety
    d_clmin_m: float = 14.0
    t_max_cl_s: float = 6.0
    ttcx_min_s: float = 2.3
    # overtaking
    delta_v_ot_kmh: float = 15.0
    overtake_decision_ttc_s: float = 20.0
    overtake_timeout_s: float = 30.0
    # decision inference
    lane_change_vy_mps: float = 0.25
    decision_latch_settle_s: float = 0.5
    decision_latch_timeout_s: float = 15.0
    # calibration
    cut_in_decel_divider_mps2: float = 0.35
    # speed limits (km/h)
    global_speed_min_kmh: float = 60.0
    global_speed_max_kmh: float = 120.0
    lane1_min_3lanes_kmh: float = 110.0
    middle_min_3lanes_kmh: float = 90.0
    lane1_min_2lanes_kmh: float = 100.0
    # following distances
    following_fast_threshold_kmh: float = 100.0
    following_fast_gap_m: float = 100.0
    following_slow_gap_m: float = 50.0
    # intersection
    angle_range_gs_rad: float = math.pi / 6.0
    angle_range_tl_lo_rad: float = math.pi / 6.0
    angle_range_tl_hi_rad: float = math.pi / 2.0
    virtual_lane_widening_m: float = 0.0
    pedestrian_min_speed_mps: float = 0.2
    pedestrian_lookahead_s: float = 5.0
    # mechanics
    sampling_period_s: float = 0.04
    curve_sample_step_m: float = 0.1
    debounce_samples: int = 0
    # reporting
    highway_bin_width_s: float = 5.0
    intersection_bin_width_s: float = 20.0

    def __post_init__(self):
        positive = [self.d_clmin_m, self.t_max_cl_s, self.ttcx_min_s, self.delta_v_ot_kmh,
                    self.lane_change_vy_mps, self.overtake_decision_ttc_s,
                    self.cut_in_decel_divider_mps2, self.sampling_period_s]
        if any(v <= 0 for v in positive):
            raise ValueError("thresholds must be positive")
        if self.d_clmin_m >= 100.0:
            raise ValueError("d_clmin must be below 100 m")
        if self.ttcx_min_s >= self.overtake_decision_ttc_s:
            raise ValueError("lane-change TTC threshold must be below the overtake decision TTC")

    # -- lane speed minimums (Article 78 table) -----------------------------

    def lane_min_kmh(self, n_mainway_lanes: int, lane_id: int) -> Optional[float]:
        """Lane-specific minimum speed, or None when the law sets none."""
        if n_mainway_lanes >= 3:
            if lane_id == 1:
                return self.lane1_min_3lanes_kmh
            if 2 <= lane_id < n_mainway_lanes:
                return self.middle_min_3lanes_kmh
        elif n_mainway_lanes == 2 and lane_id == 1:
            return self.lane1_min_2lanes_kmh
        return None

    # -- persistence ---------------------------------------------------------

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ThresholdConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path) -> "ThresholdConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))
