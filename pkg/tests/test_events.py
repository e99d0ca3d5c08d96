"""Event catalogue validation and run-length tracking."""

import pytest

from lawmonitor.events import (ADVISORY_CATALOGUE, VIOLATION_CATALOGUE,
                               EventTracker, ViolationEvent)


class TestViolationEvent:
    def test_rejects_unregistered_kind(self):
        with pytest.raises(ValueError, match="unregistered"):
            ViolationEvent("99", "MadeUp", "ego", 0.0, 1.0)

    def test_rejects_inverted_span(self):
        with pytest.raises(ValueError):
            ViolationEvent("78", "SpeedViolation", "ego", 2.0, 1.0)

    def test_dict_round_trip(self):
        e = ViolationEvent("80", "FollowingViolation", "e1", 1.0, 2.5,
                           {"gap_m": 8.12})
        assert ViolationEvent.from_dict(e.to_dict()) == e

    def test_catalogues_disjoint(self):
        assert not (VIOLATION_CATALOGUE & ADVISORY_CATALOGUE)

    def test_advisory_kinds_accepted(self):
        ViolationEvent("47", "RecommendedSpeed", "ego", 0.0, 0.0)


class TestEventTracker:
    KEY = ("78", "SpeedViolation")

    def run(self, flags, debounce=0, dt=0.04):
        tr = EventTracker("ego", debounce)
        for i, on in enumerate(flags):
            tr.observe(i * dt, {self.KEY: {"frame": i}} if on else {})
        tr.finish()
        return tr.events

    def test_maximal_runs(self):
        ev = self.run([0, 1, 1, 1, 0, 0, 1, 1, 0])
        assert [(e.t_start, e.t_end) for e in ev] == \
               [(0.04, 0.12), (0.24, 0.28)]

    def test_evidence_is_onset_evidence(self):
        ev = self.run([0, 1, 1, 0])
        assert ev[0].evidence == {"frame": 1}

    def test_open_run_closed_by_finish(self):
        ev = self.run([0, 0, 1, 1])
        assert [(e.t_start, e.t_end) for e in ev] == [(0.08, 0.12)]

    def test_debounce_drops_short_runs(self):
        assert self.run([0, 1, 0, 1, 1, 0], debounce=1) == \
               [ViolationEvent("78", "SpeedViolation", "ego", 0.12, 0.16,
                               {"frame": 3})]

    def test_independent_keys(self):
        tr = EventTracker("ego")
        k2 = ("80", "FollowingViolation")
        tr.observe(0.0, {self.KEY: {}})
        tr.observe(0.04, {self.KEY: {}, k2: {}})
        tr.observe(0.08, {k2: {}})
        tr.finish()
        spans = {(e.article, e.sub_rule): (e.t_start, e.t_end) for e in tr.events}
        assert spans == {self.KEY: (0.0, 0.04), k2: (0.04, 0.08)}

    def test_events_sorted(self):
        tr = EventTracker("ego")
        tr.observe(0.0, {("80", "FollowingViolation"): {}})
        tr.observe(0.04, {})
        tr.observe(0.08, {self.KEY: {}})
        tr.finish()
        assert [e.article for e in tr.events] == ["80", "78"]
