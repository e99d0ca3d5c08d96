"""Online traffic-law violation monitoring over vehicle trajectory streams.

Subpackages by concern: metric temporal logic (:mod:`lawmonitor.mtl`),
scene modeling (:mod:`lawmonitor.world`), highway and intersection rule
monitors, decision inference, dataset replay, threshold calibration, and
reporting with a command-line front end.
"""

from .config import KMH_TO_MPS, ThresholdConfig
from .decisions import (HighwayDecisionLatch, UnsupportedDecision,
                        infer_intersection_decision)
from .events import (ADVISORY_CATALOGUE, VIOLATION_CATALOGUE, EventTracker,
                     ViolationEvent)
from .highway import HighwayMonitor, OnLineTimer, check_following_compliance, \
    check_lane_change_compliance, check_speed_compliance
from .intersection import (IntersectionMap, IntersectionMonitor, MapLane, Road,
                           build_virtual_elements, check_pedestrian,
                           check_right_of_way, check_traffic_light,
                           check_virtual_lane)
from .mtl import (Formula, Interval, MTLError, MTLSyntaxError, OnlineEvaluator,
                  Sample, UnknownAtomError, Verdict, evaluate_offline,
                  parse_formula)
from .world import (Decision, LaneGeometry, LaneLine, OffRoad, PedestrianState,
                    SceneFrame, SpeedSignContext, VehicleState,
                    distance_longitudinal, lane_of, partition_regions, ttcx)
from .dataset import (HighwayMap, Recording, SchemaError, MapError,
                      TrajectorySchema, SCHEMAS, load_light_phases, load_map,
                      load_trajectories, replay)
from .calibration import (CalibrationError, CalibrationResult, LaneChangeEvent,
                          calibrate, calibrate_cut_in_distance,
                          calibrate_on_line_time, calibrate_ttcx,
                          extract_lane_change_events)
from .reporting import ViolationReport, aggregate_events, emit_report, parse_report

__version__ = "0.1.0"
