"""Metric temporal logic over discrete-time Boolean signals.

Formulas are built from atoms, Boolean connectives and interval-bounded
temporal operators:

    G[a,b]  globally     -- holds at every sample in the window ahead
    F[a,b]  future       -- holds at some sample in the window ahead
    P[a,b]  previously   -- held at some sample in the window behind
    O[a,b]  once         -- alias of P (both are past-existential)
    U       until        -- phi1 holds until phi2 does (optionally bounded)

Two evaluation routes are provided: :func:`evaluate_offline` recurses over
a complete trace and serves as the reference oracle, while
:class:`OnlineEvaluator` consumes samples one at a time with bounded
history for bounded-past formulas.  Verdicts are three-valued; future
operators stay ``Pending`` until their deadline is observed.

Semantics are discrete-time: interval endpoints in seconds are converted
to sample counts using the evaluator's sampling period, rounding the lower
endpoint down and the upper endpoint up so a violation window is never
missed.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

__all__ = [
    "Interval",
    "Formula",
    "Sample",
    "Verdict",
    "MTLError",
    "MTLSyntaxError",
    "UnknownAtomError",
    "parse_formula",
    "evaluate_offline",
    "OnlineEvaluator",
    "true",
    "atom",
    "not_",
    "and_",
    "or_",
    "iff",
    "globally",
    "future",
    "previously",
    "once",
    "until",
]

_EPS = 1e-9


class MTLError(ValueError):
    pass


class MTLSyntaxError(MTLError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UnknownAtomError(MTLError):
    pass


# ---------------------------------------------------------------------------
# Formula AST
# ---------------------------------------------------------------------------

TRUE = "T"
ATOM = "atom"
NOT = "!"
AND = "&&"
OR = "||"
IFF = "<->"
GLOBALLY = "G"
FUTURE = "F"
PREVIOUSLY = "P"
ONCE = "O"
UNTIL = "U"

_UNARY_TEMPORAL = (GLOBALLY, FUTURE, PREVIOUSLY, ONCE)
_PAST_KINDS = (PREVIOUSLY, ONCE)
_FUTURE_KINDS = (GLOBALLY, FUTURE, UNTIL)
_BINARY = (AND, OR, IFF, UNTIL)


@dataclass(frozen=True)
class Interval:
    """Closed time interval with non-negative endpoints; ``hi`` may be inf."""

    lo: float = 0.0
    hi: float = math.inf

    def __post_init__(self):
        if self.lo < 0 or self.hi < 0:
            raise MTLError(f"interval endpoints must be non-negative: [{self.lo},{self.hi}]")
        if self.lo > self.hi:
            raise MTLError(f"interval lower endpoint exceeds upper: [{self.lo},{self.hi}]")

    @property
    def unbounded(self) -> bool:
        return math.isinf(self.hi)

    def to_samples(self, period: float) -> tuple[int, Optional[int]]:
        """Convert endpoints in seconds to sample counts, rounding outward."""
        lo = int(math.floor(self.lo / period + _EPS))
        hi = None if self.unbounded else int(math.ceil(self.hi / period - _EPS))
        return lo, hi

    def __str__(self) -> str:
        hi = "inf" if self.unbounded else _fmt_num(self.hi)
        return f"[{_fmt_num(self.lo)},{hi}]"


def _fmt_num(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(x)


@dataclass(frozen=True)
class Formula:
    """Immutable MTL syntax tree node."""

    kind: str
    children: tuple["Formula", ...] = ()
    name: Optional[str] = None
    interval: Optional[Interval] = None

    def __post_init__(self):
        arity = {TRUE: 0, ATOM: 0, NOT: 1, AND: 2, OR: 2, IFF: 2,
                 GLOBALLY: 1, FUTURE: 1, PREVIOUSLY: 1, ONCE: 1, UNTIL: 2}
        if self.kind not in arity:
            raise MTLError(f"unknown formula kind {self.kind!r}")
        if len(self.children) != arity[self.kind]:
            raise MTLError(f"{self.kind} expects {arity[self.kind]} children, got {len(self.children)}")
        if self.kind == ATOM and not self.name:
            raise MTLError("atom requires a name")
        if self.kind in _UNARY_TEMPORAL and self.interval is None:
            raise MTLError(f"{self.kind} requires an interval")

    def atoms(self) -> set[str]:
        if self.kind == ATOM:
            return {self.name}
        out: set[str] = set()
        for c in self.children:
            out |= c.atoms()
        return out

    def has_future(self) -> bool:
        if self.kind in _FUTURE_KINDS:
            return True
        return any(c.has_future() for c in self.children)

    def max_past_depth(self, period: float) -> int:
        """Retained-history requirement in samples (bounded past windows only)."""
        child = max((c.max_past_depth(period) for c in self.children), default=0)
        own = 0
        if self.kind in _PAST_KINDS and not self.interval.unbounded:
            own = self.interval.to_samples(period)[1]
        return child + own

    def to_dsl(self) -> str:
        """Pretty-print to the formula DSL; re-parses to an equal tree."""
        if self.kind == TRUE:
            return "T"
        if self.kind == ATOM:
            return self.name
        if self.kind == NOT:
            return f"!{self._child_dsl(0)}"
        if self.kind in _UNARY_TEMPORAL:
            return f"{self.kind}{self.interval}{self._child_dsl(0)}"
        if self.kind == UNTIL:
            op = "U" if self.interval is None else f"U{self.interval}"
            return f"({self.children[0].to_dsl()} {op} {self.children[1].to_dsl()})"
        return f"({self.children[0].to_dsl()} {self.kind} {self.children[1].to_dsl()})"

    def _child_dsl(self, i: int) -> str:
        c = self.children[i]
        s = c.to_dsl()
        if c.kind in (TRUE, ATOM) or s.startswith("("):
            return f" {s}" if not s.startswith("(") else s
        return f"({s})"

    def __str__(self) -> str:
        return self.to_dsl()


def true() -> Formula:
    return Formula(TRUE)


def atom(name: str) -> Formula:
    return Formula(ATOM, name=name)


def not_(phi: Formula) -> Formula:
    return Formula(NOT, (phi,))


def and_(a: Formula, b: Formula) -> Formula:
    return Formula(AND, (a, b))


def or_(a: Formula, b: Formula) -> Formula:
    return Formula(OR, (a, b))


def iff(a: Formula, b: Formula) -> Formula:
    return Formula(IFF, (a, b))


def globally(interval: Interval, phi: Formula) -> Formula:
    return Formula(GLOBALLY, (phi,), interval=interval)


def future(interval: Interval, phi: Formula) -> Formula:
    return Formula(FUTURE, (phi,), interval=interval)


def previously(interval: Interval, phi: Formula) -> Formula:
    return Formula(PREVIOUSLY, (phi,), interval=interval)


def once(interval: Interval, phi: Formula) -> Formula:
    return Formula(ONCE, (phi,), interval=interval)


def until(a: Formula, b: Formula, interval: Optional[Interval] = None) -> Formula:
    return Formula(UNTIL, (a, b), interval=interval)


def expand_iff(phi: Formula) -> Formula:
    """Rewrite a <-> b as (!a || b) && (a || !b), recursively."""
    children = tuple(expand_iff(c) for c in phi.children)
    if phi.kind == IFF:
        a, b = children
        return and_(or_(not_(a), b), or_(a, not_(b)))
    if children == phi.children:
        return phi
    return Formula(phi.kind, children, name=phi.name, interval=phi.interval)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<lpar>\()|(?P<rpar>\))|(?P<iff><->)|(?P<and>&&)|(?P<or>\|\|)"
    r"|(?P<not>!)|(?P<lbrack>\[)|(?P<rbrack>\])|(?P<comma>,)"
    r"|(?P<num>\d+(?:\.\d+)?)|(?P<ident>[a-zA-Z_][a-zA-Z0-9_]*))"
)


class _Tokenizer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.tokens: list[tuple[str, str, int]] = []
        while self.pos < len(text):
            m = _TOKEN_RE.match(text, self.pos)
            if m is None or m.end() == self.pos:
                at = self.pos
                while at < len(text) and text[at].isspace():
                    at += 1
                if at >= len(text):
                    break
                raise MTLSyntaxError(f"unexpected character {text[at]!r}", at)
            kind = m.lastgroup
            self.tokens.append((kind, m.group(kind), m.start(kind)))
            self.pos = m.end()
        self.idx = 0

    def peek(self) -> Optional[tuple[str, str, int]]:
        return self.tokens[self.idx] if self.idx < len(self.tokens) else None

    def next(self) -> tuple[str, str, int]:
        tok = self.peek()
        if tok is None:
            raise MTLSyntaxError("unexpected end of input", len(self.text))
        self.idx += 1
        return tok

    def expect(self, kind: str) -> tuple[str, str, int]:
        tok = self.next()
        if tok[0] != kind:
            raise MTLSyntaxError(f"expected {kind}, found {tok[1]!r}", tok[2])
        return tok


class _Parser:
    """Recursive descent over:  iff <- or <- and <- until <- unary."""

    def __init__(self, text: str, atoms: Iterable[str]):
        self.toks = _Tokenizer(text)
        self.atoms = set(atoms)
        if not self.atoms:
            raise MTLError("atom registry is empty")

    def parse(self) -> Formula:
        phi = self._iff()
        tok = self.toks.peek()
        if tok is not None:
            raise MTLSyntaxError(f"unexpected trailing input {tok[1]!r}", tok[2])
        return phi

    def _iff(self) -> Formula:
        phi = self._or()
        while self._at("iff"):
            self.toks.next()
            phi = iff(phi, self._or())
        return phi

    def _or(self) -> Formula:
        phi = self._and()
        while self._at("or"):
            self.toks.next()
            phi = or_(phi, self._and())
        return phi

    def _and(self) -> Formula:
        phi = self._until()
        while self._at("and"):
            self.toks.next()
            phi = and_(phi, self._until())
        return phi

    def _until(self) -> Formula:
        phi = self._unary()
        tok = self.toks.peek()
        if tok is not None and tok[0] == "ident" and tok[1] == "U":
            self.toks.next()
            interval = self._interval() if self._at("lbrack") else None
            return until(phi, self._until(), interval)
        return phi

    def _unary(self) -> Formula:
        tok = self.toks.peek()
        if tok is None:
            raise MTLSyntaxError("unexpected end of input", len(self.toks.text))
        kind, value, pos = tok
        if kind == "not":
            self.toks.next()
            return not_(self._unary())
        if kind == "lpar":
            self.toks.next()
            phi = self._iff()
            self.toks.expect("rpar")
            return phi
        if kind == "ident":
            if value == "T":
                self.toks.next()
                return true()
            if value in ("G", "F", "P", "O") and self._peek_is_interval():
                self.toks.next()
                interval = self._interval()
                child = self._unary()
                ctor = {"G": globally, "F": future, "P": previously, "O": once}[value]
                return ctor(interval, child)
            self.toks.next()
            if value not in self.atoms:
                raise UnknownAtomError(f"unknown atom {value!r} (at position {pos})")
            return atom(value)
        raise MTLSyntaxError(f"unexpected token {value!r}", pos)

    def _peek_is_interval(self) -> bool:
        nxt = self.toks.tokens[self.toks.idx + 1] if self.toks.idx + 1 < len(self.toks.tokens) else None
        return nxt is not None and nxt[0] == "lbrack"

    def _interval(self) -> Interval:
        self.toks.expect("lbrack")
        lo = self._bound(allow_inf=False)
        self.toks.expect("comma")
        hi = self._bound(allow_inf=True)
        tok = self.toks.expect("rbrack")
        try:
            return Interval(lo, hi)
        except MTLError as exc:
            raise MTLSyntaxError(str(exc), tok[2]) from None

    def _bound(self, allow_inf: bool) -> float:
        tok = self.toks.next()
        if tok[0] == "num":
            return float(tok[1])
        if tok[0] == "ident" and tok[1] == "inf" and allow_inf:
            return math.inf
        raise MTLSyntaxError(f"expected interval bound, found {tok[1]!r}", tok[2])

    def _at(self, kind: str) -> bool:
        tok = self.toks.peek()
        return tok is not None and tok[0] == kind


def parse_formula(text: str, atoms: Iterable[str]) -> Formula:
    """Parse a formula DSL string against an atom registry."""
    return _Parser(text, atoms).parse()


# ---------------------------------------------------------------------------
# Traces and verdicts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Sample:
    """One timestamped valuation of every registered atom."""

    timestamp: float
    values: Mapping[str, bool]


@dataclass(frozen=True)
class Verdict:
    """Three-valued monitoring result; ``value`` is None while pending."""

    value: Optional[bool]
    decided_at: Optional[float] = None

    @property
    def is_pending(self) -> bool:
        return self.value is None

    @staticmethod
    def pending() -> "Verdict":
        return Verdict(None)


def _neg3(v: Optional[bool]) -> Optional[bool]:
    return None if v is None else not v


def _and3(a: Optional[bool], b: Optional[bool]) -> Optional[bool]:
    if a is False or b is False:
        return False
    if a is True and b is True:
        return True
    return None


def _or3(a: Optional[bool], b: Optional[bool]) -> Optional[bool]:
    if a is True or b is True:
        return True
    if a is False and b is False:
        return False
    return None


def _check_trace(trace: Sequence[Sample], atoms: set[str]):
    last = -math.inf
    for i, s in enumerate(trace):
        if s.timestamp <= last:
            raise MTLError(f"non-monotone timestamp at trace index {i}")
        last = s.timestamp
        missing = atoms - set(s.values)
        if missing:
            raise MTLError(f"sample at index {i} is missing atoms {sorted(missing)}")


# ---------------------------------------------------------------------------
# Offline reference evaluation
# ---------------------------------------------------------------------------

def evaluate_offline(formula: Formula, trace: Sequence[Sample]) -> list[Verdict]:
    """Evaluate ``formula`` at every trace index by direct recursion.

    Windows are interpreted on the recorded timestamps.  Indices whose
    future window extends past the end of the trace come back Pending.
    """
    if not trace:
        raise MTLError("empty trace")
    _check_trace(trace, formula.atoms())
    memo: dict[tuple[int, int], Optional[bool]] = {}
    times = [s.timestamp for s in trace]

    def ev(phi: Formula, i: int) -> Optional[bool]:
        key = (id(phi), i)
        if key in memo:
            return memo[key]
        memo[key] = v = _ev(phi, i)
        return v

    def _ev(phi: Formula, i: int) -> Optional[bool]:
        n = len(trace)
        if phi.kind == TRUE:
            return True
        if phi.kind == ATOM:
            return bool(trace[i].values[phi.name])
        if phi.kind == NOT:
            return _neg3(ev(phi.children[0], i))
        if phi.kind == AND:
            return _and3(ev(phi.children[0], i), ev(phi.children[1], i))
        if phi.kind == OR:
            return _or3(ev(phi.children[0], i), ev(phi.children[1], i))
        if phi.kind == IFF:
            a, b = ev(phi.children[0], i), ev(phi.children[1], i)
            if a is None or b is None:
                return None
            return a == b
        if phi.kind in (GLOBALLY, FUTURE):
            lo, hi = phi.interval.lo, phi.interval.hi
            want = phi.kind == FUTURE  # value that decides immediately
            saw_unknown = False
            for j in range(i, n):
                dt = times[j] - times[i]
                if dt > hi + _EPS:
                    break
                if dt >= lo - _EPS:
                    v = ev(phi.children[0], j)
                    if v is want:
                        return want
                    if v is None:
                        saw_unknown = True
            if saw_unknown:
                return None
            # window fully observed only if the trace extends past t_i + hi
            if not math.isinf(hi) and times[-1] >= times[i] + hi - _EPS:
                return not want
            return None
        if phi.kind in (PREVIOUSLY, ONCE):
            lo, hi = phi.interval.lo, phi.interval.hi
            saw_unknown = False
            for j in range(i, -1, -1):
                dt = times[i] - times[j]
                if dt > hi + _EPS:
                    break
                if dt >= lo - _EPS:
                    v = ev(phi.children[0], j)
                    if v is True:
                        return True
                    if v is None:
                        saw_unknown = True
            return None if saw_unknown else False
        if phi.kind == UNTIL:
            lo = phi.interval.lo if phi.interval else 0.0
            hi = phi.interval.hi if phi.interval else math.inf
            prefix: Optional[bool] = True
            saw_unknown = False
            window_done = False
            for j in range(i, n):
                dt = times[j] - times[i]
                if dt > hi + _EPS:
                    window_done = True
                    break
                if dt >= lo - _EPS:
                    hit = _and3(prefix, ev(phi.children[1], j))
                    if hit is True:
                        return True
                    if hit is None:
                        saw_unknown = True
                prefix = _and3(prefix, ev(phi.children[0], j))
                if prefix is False:
                    break
            if saw_unknown:
                return None
            if prefix is False or window_done:
                return False
            if not math.isinf(hi) and times[-1] >= times[i] + hi - _EPS:
                return False
            return None
        raise MTLError(f"unknown kind {phi.kind}")

    out = []
    for i in range(len(trace)):
        v = ev(formula, i)
        out.append(Verdict(v, trace[i].timestamp if v is not None else None))
    return out


# ---------------------------------------------------------------------------
# Online evaluation
# ---------------------------------------------------------------------------

class _Stream:
    """Per-node output stream with a pruneable prefix.

    Decided values are final (verdict monotonicity); ``frontier`` is the
    lowest index that is still undecided, and everything below ``base``
    has been pruned away.
    """

    __slots__ = ("base", "vals", "frontier")

    def __init__(self):
        self.base = 0
        self.vals: list[Optional[bool]] = []
        self.frontier = 0

    def get(self, j: int) -> Optional[bool]:
        if j < self.base:
            raise RuntimeError(f"access to pruned index {j} (base {self.base})")
        k = j - self.base
        return self.vals[k] if k < len(self.vals) else None

    def put(self, j: int, v: Optional[bool]):
        k = j - self.base
        while len(self.vals) <= k:
            self.vals.append(None)
        if self.vals[k] is None:
            self.vals[k] = v

    def advance_frontier(self, upto: int):
        while self.frontier <= upto and self.get(self.frontier) is not None:
            self.frontier += 1

    def prune_below(self, cutoff: int):
        drop = min(cutoff, self.frontier) - self.base
        if drop > 0:
            del self.vals[:drop]
            self.base += drop

    def size(self) -> int:
        return len(self.vals)


class _Node:
    def __init__(self, phi: Formula, period: float):
        self.kind = phi.kind
        self.name = phi.name
        self.children: list[_Node] = [_Node(c, period) for c in phi.children]
        self.lo = 0
        self.hi: Optional[int] = None
        if phi.interval is not None:
            self.lo, self.hi = phi.interval.to_samples(period)
        elif phi.kind == UNTIL:
            self.lo, self.hi = 0, None
        self.out = _Stream()
        # incremental state for unbounded-past operators (no history scan)
        self.first_true: Optional[int] = None
        self.false_prefix = 0

    def nodes(self):
        yield self
        for c in self.children:
            yield from c.nodes()


class OnlineEvaluator:
    """Streaming evaluator for one bound formula over one sample stream.

    ``step`` returns the verdict of the formula at the just-consumed
    sample, computed from the prefix seen so far; future-operator verdicts
    that cannot be decided yet are Pending and are re-examined on later
    steps.  ``drain_resolved`` hands out verdicts for earlier indices as
    they become decidable.

    Not shareable during evaluation; create one instance per stream.
    """

    def __init__(self, formula: Formula, atoms: Iterable[str], period: float = 0.04):
        registry = set(atoms)
        dangling = formula.atoms() - registry
        if dangling:
            raise UnknownAtomError(f"formula uses unregistered atoms {sorted(dangling)}")
        self.formula = formula
        self.atoms = registry
        self.period = period
        self._root = _Node(expand_iff(formula), period)
        self._nodes = list(self._root.nodes())
        self._past_depth = 1 + sum(
            (n.hi or 0) for n in self._nodes if n.kind in _PAST_KINDS and n.hi is not None
        )
        self._idx = -1
        self._last_t = -math.inf
        self._resolved: dict[int, Verdict] = {}
        self._unreported: list[int] = []

    def step(self, sample: Sample) -> Verdict:
        if sample.timestamp <= self._last_t:
            raise MTLError(f"non-monotone timestamp {sample.timestamp}")
        missing = self.atoms - set(sample.values)
        if missing:
            raise MTLError(f"valuation missing atoms {sorted(missing)}")
        self._last_t = sample.timestamp
        self._idx += 1
        i = self._idx
        self._update(self._root, i, sample)
        self._unreported.append(i)
        self._collect_resolved(sample.timestamp)
        self._prune()
        v = self._root.out.get(i)
        return Verdict(v, sample.timestamp if v is not None else None)

    def drain_resolved(self) -> dict[int, Verdict]:
        """Verdicts for indices decided since the last drain (by index)."""
        out = dict(self._resolved)
        self._resolved.clear()
        return out

    def retained_history_size(self) -> int:
        return max(n.out.size() for n in self._nodes)

    # -- internals ----------------------------------------------------------

    def _collect_resolved(self, now_t: float):
        root = self._root.out
        still_pending = []
        for j in self._unreported:
            v = root.get(j)
            if v is None:
                still_pending.append(j)
            else:
                self._resolved[j] = Verdict(v, now_t)
        self._unreported = still_pending

    def _prune(self):
        cutoff = min(n.out.frontier for n in self._nodes) - self._past_depth
        for n in self._nodes:
            n.out.prune_below(cutoff)

    def _update(self, node: _Node, i: int, sample: Sample):
        for c in node.children:
            self._update(c, i, sample)
        if node.kind == TRUE:
            node.out.put(i, True)
        elif node.kind == ATOM:
            node.out.put(i, bool(sample.values[node.name]))
        else:
            if node.kind in _PAST_KINDS and node.hi is None:
                self._track_unbounded_past(node, i)
            for j in range(node.out.frontier, i + 1):
                if node.out.get(j) is None:
                    v = self._eval_at(node, j, i)
                    if v is not None:
                        node.out.put(j, v)
        node.out.advance_frontier(i)

    def _track_unbounded_past(self, node: _Node, i: int):
        child = node.children[0].out
        if node.first_true is None:
            for k in range(max(node.false_prefix, child.base), i + 1):
                v = child.get(k)
                if v is True:
                    node.first_true = k
                    break
                if v is None:
                    break
                node.false_prefix = k + 1

    def _eval_at(self, node: _Node, j: int, now: int) -> Optional[bool]:
        kind = node.kind
        if kind == NOT:
            return _neg3(node.children[0].out.get(j))
        if kind == AND:
            return _and3(node.children[0].out.get(j), node.children[1].out.get(j))
        if kind == OR:
            return _or3(node.children[0].out.get(j), node.children[1].out.get(j))
        if kind in (GLOBALLY, FUTURE):
            child = node.children[0].out
            want = kind == FUTURE
            saw_unknown = False
            end = now if node.hi is None else min(now, j + node.hi)
            for k in range(j + node.lo, end + 1):
                v = child.get(k)
                if v is want:
                    return want
                if v is None:
                    saw_unknown = True
            if saw_unknown:
                return None
            if node.hi is not None and now >= j + node.hi:
                return not want
            return None
        if kind in _PAST_KINDS:
            child = node.children[0].out
            w_hi = j - node.lo
            if w_hi < 0:
                return False
            if node.hi is None:
                if node.first_true is not None and node.first_true <= w_hi:
                    return True
                if node.false_prefix > w_hi:
                    return False
                return None
            saw_unknown = False
            for k in range(max(0, j - node.hi), w_hi + 1):
                v = child.get(k)
                if v is True:
                    return True
                if v is None:
                    saw_unknown = True
            return None if saw_unknown else False
        if kind == UNTIL:
            c1, c2 = node.children[0].out, node.children[1].out
            prefix: Optional[bool] = True
            saw_unknown = False
            for k in range(j, now + 1):
                off = k - j
                if node.hi is not None and off > node.hi:
                    if saw_unknown:
                        return None
                    return False
                if off >= node.lo:
                    hit = _and3(prefix, c2.get(k))
                    if hit is True:
                        return True
                    if hit is None:
                        saw_unknown = True
                prefix = _and3(prefix, c1.get(k))
                if prefix is False:
                    return None if saw_unknown else False
            if saw_unknown:
                return None
            if node.hi is not None and now >= j + node.hi:
                return False
            return None
        raise MTLError(f"unexpected node kind {kind}")
