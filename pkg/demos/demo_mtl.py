"""Tour of the temporal-logic core: parsing, offline evaluation, and online
monitoring with bounded history.

Run from the repository root after installing the package:

    python3 demos/demo_mtl.py
"""

import math

from lawmonitor.mtl import (Interval, OnlineEvaluator, Sample,
                            evaluate_offline, parse_formula)

ATOMS = {"on_line", "changing"}


def main():
    # A long-line-occupancy rule: "never change lanes after having been on a
    # lane line continuously for the past 6 samples."
    text = "G[0,inf] !(changing && P[0,6] on_line)"
    phi = parse_formula(text, ATOMS)
    print(f"parsed:     {text}")
    print(f"round-trip: {phi.to_dsl()}")
    print(f"atoms:      {sorted(phi.atoms())}\n")

    # A trace where the ego sits on a line for 8 samples before changing.
    trace = [Sample(float(i), {"on_line": 2 <= i <= 9, "changing": i == 10})
             for i in range(14)]

    print("offline verdicts for the P[0,6] subformula at each index:")
    sub = parse_formula("P[0,6] on_line", ATOMS)
    for s, v in zip(trace, evaluate_offline(sub, trace)):
        print(f"  t={s.timestamp:4.1f}  on_line={s.values['on_line']!s:5}"
              f"  held-for-6-samples={v.value}")

    # Online: verdicts stream out as soon as they become decidable, and the
    # evaluator only retains the history the past operators actually need.
    print("\nonline monitoring (bounded history):")
    ev = OnlineEvaluator(parse_formula("!(changing && P[0,6] on_line)", ATOMS),
                         ATOMS, period=1.0)
    for s in trace:
        verdict = ev.step(s)
        resolved = ev.drain_resolved()
        flag = "" if verdict.value in (True, None) else "  <-- violation"
        print(f"  t={s.timestamp:4.1f}  verdict={verdict.value!s:5}"
              f"  resolved={sorted(resolved)}"
              f"  retained={ev.retained_history_size()}{flag}")

    # Unbounded-future operators stay pending until enough trace arrives.
    print("\npending verdicts under F[0,inf]:")
    ev = OnlineEvaluator(parse_formula("F[0,inf] changing", ATOMS), ATOMS, 1.0)
    for s in trace[:11]:
        v = ev.step(s)
        print(f"  t={s.timestamp:4.1f}  pending={v.is_pending}  value={v.value}")

    print(f"\nintervals convert to sample counts with outward rounding: "
          f"{Interval(0.05, 0.13).to_samples(0.04)} at a 0.04 s period")


if __name__ == "__main__":
    main()
