"""Threshold calibration walkthrough: recover the clearance distance, the
line-occupancy time limit, and the lane-change TTC threshold from synthetic
lane-change event populations.

    python3 demos/demo_calibration.py
"""

import numpy as np
from scipy import stats

from lawmonitor.calibration import (LaneChangeEvent, calibrate_cut_in_distance,
                                    calibrate_on_line_time, calibrate_ttcx)


def main():
    rng = np.random.default_rng(42)

    # 1. Clearance distance: rear vehicles behind a cut-in either brake hard
    #    (strong reaction) or barely adjust. Below ~14 m strong reactions
    #    dominate; the calibrator finds the crossover bin.
    events = []
    for gap_bin in (7.0, 9.0, 11.0, 13.0):         # close: mostly strong
        events += [LaneChangeEvent("e", 0, 1, 1.0, rear_gap_m=gap_bin,
                                   rear_decel_mps2=0.8)] * 400
        events += [LaneChangeEvent("e", 0, 1, 1.0, rear_gap_m=gap_bin,
                                   rear_decel_mps2=0.1)] * 10
    for gap_bin in (15.0, 17.0, 19.0, 21.0):       # far: mostly mild
        events += [LaneChangeEvent("e", 0, 1, 1.0, rear_gap_m=gap_bin,
                                   rear_decel_mps2=0.1)] * 100
        events += [LaneChangeEvent("e", 0, 1, 1.0, rear_gap_m=gap_bin,
                                   rear_decel_mps2=0.8)] * 15
    d_min, detail = calibrate_cut_in_distance(events, bin_width=2.0,
                                              dividing_deceleration=0.35)
    print(f"clearance distance: {d_min:.1f} m "
          f"(dividing deceleration {detail['dividing_mps2']} m/s^2)")

    # 2. Line-occupancy limit: fit a Beta distribution to overlap durations
    #    and take an extreme coverage quantile.
    durations = 0.8 + 8.0 * rng.beta(2.0, 5.0, size=10000)
    events = [LaneChangeEvent("e", 0.0, d, float(d)) for d in durations]
    t_max, detail = calibrate_on_line_time(events, coverage=0.9992)
    analytic = 0.8 + 8.0 * stats.beta.ppf(0.9992, 2.0, 5.0)
    print(f"line-occupancy limit: {t_max:.2f} s "
          f"(analytic quantile {analytic:.2f} s, "
          f"alpha={detail['alpha']:.2f}, beta={detail['beta']:.2f})")

    # 3. TTC threshold: overlap-duration/TTC ratios follow an inverse law in
    #    the initial front TTC; the threshold is where the fit crosses 1.
    ttcs = np.linspace(1.0, 8.0, 200)
    noise = rng.normal(0.0, 0.02, size=200)
    events = [LaneChangeEvent("e", 0.0, 1.0, float(2.3 * (1 + n)),
                              front_ttc_s=float(t))
              for t, n in zip(ttcs, noise)]
    ttc_min, detail = calibrate_ttcx(events)
    print(f"lane-change TTC threshold: {ttc_min:.2f} s "
          f"(model {detail['model']!r})")

    print("\nthe `lawmonitor calibrate` subcommand runs all three fits over "
          "a real recording\nand can write the results into a threshold "
          "config with --out-config.")


if __name__ == "__main__":
    main()
