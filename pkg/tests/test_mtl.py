"""Temporal-logic core: parser, offline reference semantics, and the online
evaluator's agreement with it."""

import math
import random

import pytest

from lawmonitor.mtl import (Formula, Interval, MTLError, MTLSyntaxError,
                            OnlineEvaluator, Sample, UnknownAtomError, and_,
                            atom, evaluate_offline, expand_iff, future,
                            globally, iff, not_, once, or_, parse_formula,
                            previously, until)

PERIOD = 1.0


def trace_of(*rows, atoms=("a", "b")):
    """rows are tuples of atom truth values in `atoms` order, 1 Hz."""
    return [Sample(float(i), dict(zip(atoms, row))) for i, row in enumerate(rows)]


def online_verdicts(formula, trace, atoms=("a", "b")):
    ev = OnlineEvaluator(formula, atoms, period=PERIOD)
    prefix, resolved = [], {}
    for s in trace:
        prefix.append(ev.step(s))
        resolved.update(ev.drain_resolved())
    return prefix, resolved


class TestParser:
    def test_round_trip(self):
        rng = random.Random(11)
        for _ in range(200):
            phi = random_formula(rng, 4)
            again = parse_formula(phi.to_dsl(), phi.atoms() or {"a"})
            assert again == phi

    def test_precedence(self):
        phi = parse_formula("a && b || c", {"a", "b", "c"})
        assert phi.kind == "||"                      # && binds tighter
        phi = parse_formula("a <-> b || c", {"a", "b", "c"})
        assert phi.kind == "<->"

    def test_intervals(self):
        phi = parse_formula("G[1.5,inf] a", {"a"})
        assert phi.interval.lo == 1.5 and math.isinf(phi.interval.hi)

    def test_syntax_error_carries_position(self):
        with pytest.raises(MTLSyntaxError) as err:
            parse_formula("G[0, a", {"a"})
        assert err.value.position is not None

    def test_unknown_atom(self):
        with pytest.raises(UnknownAtomError):
            parse_formula("a && nope", {"a"})

    def test_unbalanced_paren(self):
        with pytest.raises(MTLSyntaxError):
            parse_formula("(a && b", {"a", "b"})


class TestIntervalSampling:
    def test_outward_rounding(self):
        # seconds -> samples: floor lower bound, ceil upper bound
        assert Interval(0.05, 0.13).to_samples(0.04) == (1, 4)
        assert Interval(0.0, 2.0).to_samples(0.04) == (0, 50)
        assert Interval(1.0, math.inf).to_samples(0.04) == (25, None)

    def test_invalid(self):
        with pytest.raises(MTLError):
            Interval(2.0, 1.0)
        with pytest.raises(MTLError):
            Interval(-1.0, 1.0)


class TestOfflineSemantics:
    def test_past_existential(self):
        # P[0,2] a over a@t=0 only: window reaches back 2 samples
        phi = previously(Interval(0, 2), atom("a"))
        tr = trace_of((True,), (False,), (False,), (False,), atoms=("a",))
        vals = [v.value for v in evaluate_offline(phi, tr)]
        assert vals == [True, True, True, False]

    def test_once_latches(self):
        phi = once(Interval(0, math.inf), atom("a"))
        tr = trace_of((False,), (True,), (False,), atoms=("a",))
        assert [v.value for v in evaluate_offline(phi, tr)] == [False, True, True]

    def test_until(self):
        phi = until(atom("a"), atom("b"))
        tr = trace_of((True, False), (True, False), (False, True))
        assert [v.value for v in evaluate_offline(phi, tr)] == [True, True, True]

    def test_globally_pending_at_trace_end(self):
        phi = globally(Interval(0, 5), atom("a"))
        tr = trace_of((True,), (True,), atoms=("a",))
        assert all(v.is_pending for v in evaluate_offline(phi, tr))

    def test_future_decides_early_on_hit(self):
        phi = future(Interval(0, 5), atom("a"))
        tr = trace_of((False,), (True,), atoms=("a",))
        assert evaluate_offline(phi, tr)[0].value is True


class TestOnlineSemantics:
    def test_until_prefix_verdicts(self):
        phi = until(atom("a"), atom("b"))
        tr = trace_of((True, False), (True, False), (False, True))
        prefix, resolved = online_verdicts(phi, tr)
        assert [v.value for v in prefix] == [None, None, True]
        assert {i: v.value for i, v in resolved.items()} == {0: True, 1: True, 2: True}

    def test_once_latch_online(self):
        phi = once(Interval(0, math.inf), atom("a"))
        tr = trace_of((False,), (True,), (False,), atoms=("a",))
        prefix, _ = online_verdicts(phi, tr, atoms=("a",))
        assert [v.value for v in prefix] == [False, True, True]

    def test_verdict_monotone(self):
        rng = random.Random(5)
        for _ in range(100):
            phi = random_formula(rng, 3)
            tr = random_trace(rng, 40)
            ev = OnlineEvaluator(phi, ("a", "b"), period=PERIOD)
            decided = {}
            for s in tr:
                ev.step(s)
                for i, v in ev.drain_resolved().items():
                    assert i not in decided, "verdict re-decided"
                    decided[i] = v.value
                    assert v.value is not None

    def test_rejects_non_monotone_time(self):
        ev = OnlineEvaluator(atom("a"), ("a",))
        ev.step(Sample(0.0, {"a": True}))
        with pytest.raises(MTLError):
            ev.step(Sample(0.0, {"a": True}))


def random_formula(rng, depth):
    if depth == 0 or rng.random() < 0.3:
        return rng.choice([atom("a"), atom("b"), Formula("T")])
    kind = rng.choice(["!", "&&", "||", "<->", "G", "F", "P", "O", "U"])
    iv = Interval(float(rng.randint(0, 5)),
                  math.inf if rng.random() < 0.25 else float(rng.randint(5, 10)))
    if kind == "!":
        return not_(random_formula(rng, depth - 1))
    if kind in ("&&", "||", "<->", "U"):
        a, b = random_formula(rng, depth - 1), random_formula(rng, depth - 1)
        return {"&&": and_, "||": or_, "<->": iff,
                "U": lambda x, y: until(x, y)}[kind](a, b)
    ctor = {"G": globally, "F": future, "P": previously, "O": once}[kind]
    return ctor(iv, random_formula(rng, depth - 1))


def random_trace(rng, max_len):
    n = rng.randint(1, max_len)
    return [Sample(float(i), {"a": rng.random() < 0.5, "b": rng.random() < 0.5})
            for i in range(n)]


class TestOnlineOfflineAgreement:
    def test_random_equivalence(self):
        """Online resolved verdicts match offline at every decided index."""
        rng = random.Random(1234)
        for _ in range(300):
            phi = random_formula(rng, 4)
            tr = random_trace(rng, 120)
            offline = evaluate_offline(phi, tr)
            _, resolved = online_verdicts(phi, tr)
            for i, v in enumerate(offline):
                if v.value is None:
                    continue
                assert i in resolved, f"{phi.to_dsl()}: index {i} unresolved online"
                assert resolved[i].value == v.value, \
                    f"{phi.to_dsl()}: mismatch at {i}"

    def test_iff_expansion_equivalent(self):
        rng = random.Random(99)
        for _ in range(100):
            phi = iff(random_formula(rng, 2), random_formula(rng, 2))
            tr = random_trace(rng, 60)
            direct = [v.value for v in evaluate_offline(phi, tr)]
            expanded = [v.value for v in evaluate_offline(expand_iff(phi), tr)]
            assert direct == expanded

    def test_duality(self):
        """!G phi == F !phi on every decided index."""
        rng = random.Random(3)
        for _ in range(100):
            body = random_formula(rng, 2)
            iv = Interval(0.0, float(rng.randint(1, 8)))
            lhs = not_(globally(iv, body))
            rhs = future(iv, not_(body))
            tr = random_trace(rng, 60)
            assert [v.value for v in evaluate_offline(lhs, tr)] == \
                   [v.value for v in evaluate_offline(rhs, tr)]


class TestBoundedMemory:
    def test_bounded_past_prunes(self):
        phi = parse_formula("P[0,10] a && O[2,5] a", {"a"})
        ev = OnlineEvaluator(phi, ("a",), period=1.0)
        peak = 0
        for i in range(5000):
            ev.step(Sample(float(i), {"a": i % 7 == 0}))
            ev.drain_resolved()
            peak = max(peak, ev.retained_history_size())
        assert peak <= 50, f"retained {peak} samples for a bounded-past formula"
