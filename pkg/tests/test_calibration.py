"""Threshold calibration: the three fits on controlled synthetic event sets,
and lane-change event extraction from a replayed recording."""

import csv
import math
import random

import numpy as np
import pytest
from scipy import stats

from lawmonitor.calibration import (CalibrationError, CalibrationResult,
                                    LaneChangeEvent, calibrate,
                                    calibrate_cut_in_distance,
                                    calibrate_on_line_time, calibrate_ttcx,
                                    deceleration_divider_diagnostic,
                                    extract_lane_change_events)
from lawmonitor.config import ThresholdConfig
from lawmonitor.dataset import CANONICAL_SCHEMA, load_map, load_trajectories
from test_dataset import HIGHWAY_MAP, HEADERS, row, write_csv


def event(duration=2.0, rear_gap=None, rear_decel=None, front_ttc=None,
          t0=0.0):
    return LaneChangeEvent("e", t0, t0 + duration, duration,
                           rear_gap_m=rear_gap, rear_decel_mps2=rear_decel,
                           front_ttc_s=front_ttc)


class TestEventModel:
    def test_requires_positive_duration(self):
        with pytest.raises(ValueError):
            LaneChangeEvent("e", 1.0, 1.0, 0.0)

    def test_ratio(self):
        assert event(duration=2.0, front_ttc=4.0).ratio == 0.5
        assert event(duration=2.0).ratio is None


def cut_in_events(divider_at=14.0, rng=None):
    """Synthetic gap/deceleration population whose cumulative-from-above
    mild/strong crossover sits exactly at ``divider_at`` metres.

    Below the threshold strong decelerations dominate every bin by a wide
    margin; above it mild ones do.
    """
    rng = rng or random.Random(42)
    ev = []
    # below the threshold, strong decelerations per bin outweigh the whole
    # mild tail above it, so the cumulative scan cannot cross early
    for b in range(int(divider_at) - 4, int(divider_at)):
        for _ in range(400):
            ev.append(event(rear_gap=b + rng.random() * 0.9, rear_decel=0.8))
        for _ in range(10):
            ev.append(event(rear_gap=b + rng.random() * 0.9, rear_decel=0.1))
    for b in range(int(divider_at), int(divider_at) + 4):
        for _ in range(100):
            ev.append(event(rear_gap=b + rng.random() * 0.9, rear_decel=0.1))
        for _ in range(15):
            ev.append(event(rear_gap=b + rng.random() * 0.9, rear_decel=0.8))
    rng.shuffle(ev)
    return ev


class TestCutInDistance:
    def test_recovers_known_crossover(self):
        value, detail = calibrate_cut_in_distance(cut_in_events(14.0))
        assert value == 14.0
        assert detail["dividing_mps2"] == 0.35

    def test_crossover_follows_population(self):
        value, _ = calibrate_cut_in_distance(cut_in_events(10.0))
        assert value == 10.0

    def test_monotone_in_dividing_line(self):
        """A dividing line above both modes turns every event 'mild', pulling
        the crossover down; one below both modes raises an error."""
        ev = cut_in_events(14.0)
        v_mid, _ = calibrate_cut_in_distance(ev, dividing_deceleration=0.35)
        v_high, _ = calibrate_cut_in_distance(ev, dividing_deceleration=1.0)
        assert v_high <= v_mid
        with pytest.raises(CalibrationError, match="no crossover"):
            calibrate_cut_in_distance(ev, dividing_deceleration=0.05)

    def test_insufficient_events(self):
        with pytest.raises(CalibrationError, match=">= 30"):
            calibrate_cut_in_distance([event(rear_gap=5.0, rear_decel=0.5)] * 10)

    def test_events_without_rear_data_skipped(self):
        ev = cut_in_events(14.0) + [event()] * 50
        assert calibrate_cut_in_distance(ev)[0] == 14.0

    def test_shuffle_invariant(self):
        ev = cut_in_events(14.0)
        rng = random.Random(7)
        for _ in range(3):
            rng.shuffle(ev)
            assert calibrate_cut_in_distance(ev)[0] == 14.0


class TestOnLineTime:
    A, B, LO, SPAN = 2.0, 5.0, 0.8, 8.0   # Beta(2,5) mapped to [0.8, 8.8]

    def durations(self, n=10000, seed=0):
        rng = np.random.default_rng(seed)
        return self.LO + self.SPAN * rng.beta(self.A, self.B, size=n)

    def events(self, n=10000, seed=0):
        return [event(duration=d) for d in self.durations(n, seed)]

    def analytic_quantile(self, coverage=0.9992):
        return self.LO + self.SPAN * stats.beta.ppf(coverage, self.A, self.B)

    def test_coverage_quantile_within_tolerance(self):
        value, detail = calibrate_on_line_time(self.events(), coverage=0.9992)
        want = self.analytic_quantile()
        assert abs(value - want) / want <= 0.05
        assert detail["coverage"] == 0.9992

    def test_stable_across_seeds(self):
        want = self.analytic_quantile()
        for seed in range(5):
            value, _ = calibrate_on_line_time(self.events(seed=seed))
            assert abs(value - want) / want <= 0.05, seed

    def test_shape_parameters_converge_on_unit_support(self):
        """With the support fixed to (0,1) the fitted shape parameters
        approach the generating ones."""
        rng = np.random.default_rng(3)
        samples = rng.beta(self.A, self.B, size=20000)
        a, b, _, _ = stats.beta.fit(samples, floc=0.0, fscale=1.0)
        assert a == pytest.approx(self.A, rel=0.05)
        assert b == pytest.approx(self.B, rel=0.05)

    def test_full_coverage_returns_sample_max(self):
        ev = self.events(n=100)
        value, detail = calibrate_on_line_time(ev, coverage=1.0)
        assert value == max(e.duration_s for e in ev)
        assert detail["coverage"] == 1.0

    def test_degenerate_durations_rejected(self):
        with pytest.raises(CalibrationError, match="degenerate"):
            calibrate_on_line_time([event(duration=2.0)] * 50)

    def test_insufficient_events(self):
        with pytest.raises(CalibrationError, match=">= 30"):
            calibrate_on_line_time(self.events(n=10))


class TestTtcx:
    def events_with_constant_duration(self, c=2.3, n=200, seed=1):
        """duration = c for every event makes ratio = c / TTC exactly, so the
        fit must return c regardless of the TTC spread."""
        rng = np.random.default_rng(seed)
        ttcs = rng.uniform(1.0, 12.0, size=n)
        return [event(duration=c, front_ttc=float(t)) for t in ttcs]

    def test_recovers_exact_constant(self):
        value, detail = calibrate_ttcx(self.events_with_constant_duration(2.3))
        assert value == pytest.approx(2.3, abs=1e-9)
        assert detail["model"] == "ratio = c / TTC"

    def test_scale_invariance(self):
        v1, _ = calibrate_ttcx(self.events_with_constant_duration(2.0))
        v2, _ = calibrate_ttcx(self.events_with_constant_duration(4.0))
        assert v2 == pytest.approx(2 * v1)

    def test_noisy_fit_close(self):
        rng = np.random.default_rng(9)
        ev = []
        for t in rng.uniform(1.0, 12.0, size=500):
            d = 2.3 * (1 + rng.normal(0, 0.05))
            ev.append(event(duration=max(d, 0.01), front_ttc=float(t)))
        value, _ = calibrate_ttcx(ev)
        assert value == pytest.approx(2.3, abs=0.05)

    def test_no_crossing_rejected(self):
        # all ratios far below one with TTCs well above the implied crossing
        ev = [event(duration=0.1, front_ttc=float(t))
              for t in np.linspace(5.0, 12.0, 50)]
        with pytest.raises(CalibrationError):
            calibrate_ttcx(ev)

    def test_insufficient_events(self):
        with pytest.raises(CalibrationError, match=">= 30"):
            calibrate_ttcx(self.events_with_constant_duration(n=5))


class TestDividerDiagnostic:
    def test_two_means_split_separates_modes(self):
        ev = [event(rear_gap=5.0, rear_decel=d)
              for d in [0.1] * 50 + [0.8] * 50]
        split = deceleration_divider_diagnostic(ev)
        assert 0.1 < split < 0.8


class TestResult:
    def test_apply_to_overrides_only_fitted(self):
        cfg = ThresholdConfig()
        res = CalibrationResult(d_clmin_m=12.0, ttcx_min_s=2.0)
        out = res.apply_to(cfg)
        assert out.d_clmin_m == 12.0
        assert out.ttcx_min_s == 2.0
        assert out.t_max_cl_s == cfg.t_max_cl_s
        assert cfg.d_clmin_m == 14.0  # original untouched

    def test_save_round_trip(self, tmp_path):
        import json
        res = CalibrationResult(d_clmin_m=12.0, details={"n_events": 3})
        p = tmp_path / "r.json"
        res.save(p)
        doc = json.loads(p.read_text())
        assert doc["d_clmin_m"] == 12.0 and doc["t_max_cl_s"] is None


def lane_change_recording(tmp_path, n_changes=4):
    """Recording with repeated lane 3 -> 2 -> 3 changes by the ego plus a
    rear vehicle in the target lane."""
    rows = []
    period_s = 10.0
    total = n_changes * period_s
    for i in range(int(total / 0.04)):
        t = i * 0.04
        ph = t % period_s
        if ph < 2.0:
            y, vy = 1.875, 0.0
        elif ph < 4.5:
            y, vy = 1.875 + 1.5 * (ph - 2.0), 1.5
        elif ph < 6.0:
            y, vy = 5.625, 0.0
        elif ph < 8.5:
            y, vy = 5.625 - 1.5 * (ph - 6.0), -1.5
        else:
            y, vy = 1.875, 0.0
        rows.append(row("ego", i, 26.0 * t, y=y, vx=26.0, vy=vy))
        rows.append(row("R", i, 26.0 * t - 20.0, y=5.625, vx=26.0))
    p = write_csv(tmp_path / "t.csv", rows)
    return load_trajectories(p, CANONICAL_SCHEMA), load_map(str(HIGHWAY_MAP))


class TestExtraction:
    def test_extracts_all_completed_changes(self, tmp_path):
        rec, hmap = lane_change_recording(tmp_path, n_changes=3)
        events = extract_lane_change_events(rec, hmap)
        ego_events = [e for e in events if e.ego_id == "ego"]
        assert len(ego_events) == 6  # out and back per cycle

    def test_durations_match_script(self, tmp_path):
        rec, hmap = lane_change_recording(tmp_path, n_changes=2)
        for e in extract_lane_change_events(rec, hmap):
            if e.ego_id != "ego":
                continue
            # 1.8 m of lateral travel on the line at 1.5 m/s
            assert e.duration_s == pytest.approx(1.2, abs=0.1)

    def test_rear_context_captured(self, tmp_path):
        rec, hmap = lane_change_recording(tmp_path, n_changes=2)
        ego_events = [e for e in extract_lane_change_events(rec, hmap)
                      if e.ego_id == "ego"]
        with_rear = [e for e in ego_events if e.rear_gap_m is not None]
        assert with_rear
        for e in with_rear:
            assert 0 <= e.rear_gap_m <= 30.0
            assert e.rear_decel_mps2 is not None

    def test_abandoned_change_not_counted(self, tmp_path):
        # ego touches the line but returns to its own lane
        rows = []
        for i in range(200):
            t = i * 0.04
            if t < 2.0:
                y = 1.875
            elif t < 4.0:
                y = 1.875 + 1.2 * (t - 2.0)  # peaks at 4.275, on line 3 only
            elif t < 6.0:
                y = 4.275 - 1.2 * (t - 4.0)
            else:
                y = 1.875
            rows.append(row("ego", i, 26.0 * t, y=min(y, 4.2), vx=26.0))
        p = write_csv(tmp_path / "t.csv", rows)
        rec = load_trajectories(p, CANONICAL_SCHEMA)
        events = extract_lane_change_events(rec, load_map(str(HIGHWAY_MAP)))
        assert [e for e in events if e.ego_id == "ego"] == []


class TestOrchestrator:
    def test_partial_results_with_errors_recorded(self, tmp_path):
        rec, hmap = lane_change_recording(tmp_path, n_changes=2)
        res = calibrate(rec, hmap)
        # too few events for any fit: values absent, reasons recorded
        assert res.details["n_events"] > 0
        for key in ("d_clmin_m", "t_max_cl_s", "ttcx_min_s"):
            assert getattr(res, key) is None
            assert "error" in res.details[key]
