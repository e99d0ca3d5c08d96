"""Aggregation of violation events into time-binned statistics and reports.

Events are counted into half-open bins [k·w, (k+1)·w) by start time; the
report carries per-type bin counts, per-type proportions over the fragment,
the full event log, and advisories in a separate section so violation
counts stay pure.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .events import VIOLATION_CATALOGUE, ViolationEvent


@dataclass
class ViolationReport:
    bin_width_s: float
    n_bins: int
    # type key "article/sub_rule" -> list of per-bin counts (length n_bins)
    bins: dict[str, list[int]] = field(default_factory=dict)
    proportions: Optional[dict[str, float]] = None   # None when no events
    events: list[ViolationEvent] = field(default_factory=list)
    advisories: list[ViolationEvent] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    @property
    def total_events(self) -> int:
        return len(self.events)

    def to_dict(self) -> dict:
        return {
            "bin_width_s": self.bin_width_s,
            "n_bins": self.n_bins,
            "bins": {k: list(v) for k, v in sorted(self.bins.items())},
            "proportions": (dict(sorted(self.proportions.items()))
                            if self.proportions is not None else None),
            "events": [e.to_dict() for e in self.events],
            "advisories": [a.to_dict() for a in self.advisories],
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ViolationReport":
        return cls(d["bin_width_s"], d["n_bins"],
                   {k: list(v) for k, v in d["bins"].items()},
                   dict(d["proportions"]) if d["proportions"] is not None else None,
                   [ViolationEvent.from_dict(e) for e in d["events"]],
                   [ViolationEvent.from_dict(a) for a in d["advisories"]],
                   dict(d.get("metadata", {})))


def _type_key(e: ViolationEvent) -> str:
    return f"{e.article}/{e.sub_rule}"


def aggregate_events(events: Sequence[ViolationEvent], bin_width: float,
                     advisories: Sequence[ViolationEvent] = (),
                     metadata: Optional[dict] = None) -> ViolationReport:
    """Bin events by start time and compute per-type proportions."""
    if bin_width <= 0:
        raise ValueError("bin width must be positive")
    events = sorted(events, key=lambda e: (e.ego_id, e.t_start, e.article, e.sub_rule))
    advisories = sorted(advisories,
                        key=lambda e: (e.ego_id, e.t_start, e.article, e.sub_rule))
    n_bins = 0
    if events:
        n_bins = int(max(e.t_start for e in events) // bin_width) + 1
    report = ViolationReport(bin_width, n_bins, metadata=metadata or {})
    for e in events:
        key = _type_key(e)
        counts = report.bins.setdefault(key, [0] * n_bins)
        counts[int(e.t_start // bin_width)] += 1
    if events:
        report.proportions = {k: sum(v) / len(events)
                              for k, v in report.bins.items()}
    report.events = list(events)
    report.advisories = list(advisories)
    return report


def emit_report(report: ViolationReport, fmt: str = "json") -> str:
    """Serialize a report; JSON round-trips exactly, CSV gives the bin table."""
    if fmt == "json":
        return json.dumps(report.to_dict(), indent=2, sort_keys=True)
    if fmt == "csv":
        types = sorted(f"{a}/{s}" for a, s in VIOLATION_CATALOGUE)
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["t_bin_start_s"] + types)
        zeros = [0] * report.n_bins
        for i in range(report.n_bins):
            writer.writerow([i * report.bin_width_s]
                            + [report.bins.get(t, zeros)[i] for t in types])
        return buf.getvalue()
    raise ValueError(f"unknown report format {fmt!r}")


def parse_report(text: str) -> ViolationReport:
    """Inverse of ``emit_report(..., "json")``."""
    return ViolationReport.from_dict(json.loads(text))
