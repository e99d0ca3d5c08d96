"""Violation events, advisories and run-length tracking.

A monitor evaluates rule verdicts every frame; the tracker turns maximal
runs of violating frames into single events with a time span and the
evidence captured at onset.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

ARTICLE_SPEED = "78"
ARTICLE_FOLLOWING = "80"
ARTICLE_ON_LINE = "82.3"
ARTICLE_LANE_CHANGE = "44"
ARTICLE_OVERTAKE = "47"
ARTICLE_INTERSECTION = "38"

# registered (article, sub_rule) catalogue
VIOLATION_CATALOGUE = frozenset({
    (ARTICLE_SPEED, "SpeedViolation"),
    (ARTICLE_FOLLOWING, "FollowingViolation"),
    (ARTICLE_ON_LINE, "LngTmOnLine"),
    (ARTICLE_LANE_CHANGE, "FrontViolation"),
    (ARTICLE_LANE_CHANGE, "RearLeftViolation"),
    (ARTICLE_LANE_CHANGE, "FrontLeftViolation"),
    (ARTICLE_LANE_CHANGE, "RearRightViolation"),
    (ARTICLE_LANE_CHANGE, "FrontRightViolation"),
    (ARTICLE_LANE_CHANGE, "LngTmOnLine"),
    (ARTICLE_OVERTAKE, "FrontViolation"),
    (ARTICLE_OVERTAKE, "RearLeftViolation"),
    (ARTICLE_OVERTAKE, "FrontLeftViolation"),
    (ARTICLE_OVERTAKE, "RearRightViolation"),
    (ARTICLE_OVERTAKE, "FrontRightViolation"),
    (ARTICLE_OVERTAKE, "LngTmOnLine"),
    (ARTICLE_OVERTAKE, "FrontOvertaking"),
    (ARTICLE_OVERTAKE, "OvertakeonRight"),
    (ARTICLE_INTERSECTION, "IllegalPass"),
    (ARTICLE_INTERSECTION, "VirtualLaneViolation"),
    (ARTICLE_INTERSECTION, "ViolationRightofWay"),
    (ARTICLE_INTERSECTION, "ImpedePedestrian"),
})

ADVISORY_CATALOGUE = frozenset({
    (ARTICLE_OVERTAKE, "RecommendedSpeed"),
    (ARTICLE_OVERTAKE, "IncompleteOvertake"),
    (ARTICLE_INTERSECTION, "UnusualVirtualLane"),
})


@dataclass(frozen=True)
class ViolationEvent:
    article: str
    sub_rule: str
    ego_id: str
    t_start: float
    t_end: float
    evidence: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.t_start > self.t_end:
            raise ValueError("event start after end")
        if (self.article, self.sub_rule) not in VIOLATION_CATALOGUE | ADVISORY_CATALOGUE:
            raise ValueError(f"unregistered violation kind ({self.article}, {self.sub_rule})")

    def to_dict(self) -> dict:
        return {
            "article": self.article,
            "sub_rule": self.sub_rule,
            "ego_id": self.ego_id,
            "t_start": self.t_start,
            "t_end": self.t_end,
            "evidence": self.evidence,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ViolationEvent":
        return cls(d["article"], d["sub_rule"], d["ego_id"], d["t_start"], d["t_end"],
                   dict(d.get("evidence", {})))


class EventTracker:
    """Collapses per-frame violation flags into maximal-run events."""

    def __init__(self, ego_id: str, debounce_samples: int = 0):
        self.ego_id = ego_id
        self.debounce = debounce_samples
        self._open: dict[tuple[str, str], dict] = {}
        self._closed: list[ViolationEvent] = []

    def observe(self, t: float, active: dict[tuple[str, str], dict]):
        """Record this frame's violating keys with their evidence."""
        for key, evidence in active.items():
            run = self._open.get(key)
            if run is None:
                self._open[key] = {"start": t, "end": t, "evidence": dict(evidence), "count": 1}
            else:
                run["end"] = t
                run["count"] += 1
        for key in list(self._open):
            if key not in active:
                self._close(key)

    def finish(self):
        for key in list(self._open):
            self._close(key)

    def _close(self, key):
        run = self._open.pop(key)
        if run["count"] > self.debounce:
            self._closed.append(ViolationEvent(
                key[0], key[1], self.ego_id, run["start"], run["end"], run["evidence"]))

    @property
    def events(self) -> list[ViolationEvent]:
        return sorted(self._closed, key=lambda e: (e.t_start, e.article, e.sub_rule))
