"""m-way sliding-window join over a single merged input sequence.

Each arriving tuple either triggers a probe (when its timestamp has not
fallen behind the join's high-water mark) or is merely inserted into its
stream's window for later probes.  Probes pair the trigger with one
tuple from every other stream's window; windows are trimmed relative to
the trigger's timestamp before probing.

Results carry the trigger's timestamp.  Probe bookkeeping (candidate
space size, match count, lateness of the trigger) is reported per
arrival so a profiler can track productivity by delay.
"""
from __future__ import annotations

from bisect import bisect_left, insort
from dataclasses import dataclass
from math import prod
from typing import Callable, Sequence

from .core import StreamTuple, WindowSpec


@dataclass(frozen=True)
class ResultTuple:
    """Join result: one part per stream (index 1..m), plus a timestamp."""

    parts: tuple[StreamTuple, ...]
    ts: int

    def identity(self) -> tuple[tuple[int, int], ...]:
        """(stream, seq) of every part; timestamp-independent."""
        return tuple((p.stream, p.seq) for p in self.parts)


@dataclass(frozen=True)
class ProbeRecord:
    """Per-arrival probe accounting.

    n_cross is the candidate-combination count (product of the other
    windows' cardinalities after trimming); n_join the number of
    predicate matches.  Both are 0 for late arrivals, which never probe.
    ts is the arrival's timestamp (the result timestamp when n_join > 0).
    """

    delay: int
    n_cross: int
    n_join: int
    in_order: bool
    ts: int = 0


class JoinPredicate:
    """Base class; subclasses decide which part combinations match."""

    def matches(self, parts: Sequence[StreamTuple]) -> bool:
        raise NotImplementedError

    def validate(self, m: int) -> None:
        pass

    def equi_pairs(self) -> tuple:
        """Equality constraints as ((stream, attr), (stream, attr)) pairs."""
        return ()

    def band_pairs(self) -> tuple:
        return ()

    def needs_leaf_check(self) -> bool:
        """True when only a full-combination test can decide a match."""
        return False


class CrossPredicate(JoinPredicate):
    """Every combination matches."""

    def matches(self, parts: Sequence[StreamTuple]) -> bool:
        return True


class EquiPredicate(JoinPredicate):
    """Conjunction of attribute equalities between pairs of streams."""

    def __init__(self, pairs: Sequence[tuple[tuple[int, str], tuple[int, str]]]):
        if not pairs:
            raise ValueError("equi predicate needs at least one pair")
        self.pairs = tuple((tuple(a), tuple(b)) for a, b in pairs)

    def matches(self, parts: Sequence[StreamTuple]) -> bool:
        for (sa, aa), (sb, ab) in self.pairs:
            if parts[sa - 1].value(aa) != parts[sb - 1].value(ab):
                return False
        return True

    def validate(self, m: int) -> None:
        for (sa, _), (sb, _) in self.pairs:
            if not (1 <= sa <= m and 1 <= sb <= m) or sa == sb:
                raise ValueError(f"equi pair references bad streams ({sa}, {sb})")

    def equi_pairs(self) -> tuple:
        return self.pairs


class BandPredicate(JoinPredicate):
    """|a - b| < theta between two streams' numeric attributes."""

    def __init__(self, stream_a: int, attr_a: str, stream_b: int, attr_b: str,
                 theta: float):
        if theta <= 0:
            raise ValueError("band width must be positive")
        self.stream_a, self.attr_a = stream_a, attr_a
        self.stream_b, self.attr_b = stream_b, attr_b
        self.theta = theta

    def matches(self, parts: Sequence[StreamTuple]) -> bool:
        va = parts[self.stream_a - 1].value(self.attr_a)
        vb = parts[self.stream_b - 1].value(self.attr_b)
        return abs(va - vb) < self.theta

    def validate(self, m: int) -> None:
        for s in (self.stream_a, self.stream_b):
            if not (1 <= s <= m):
                raise ValueError(f"band predicate references bad stream {s}")
        if self.stream_a == self.stream_b:
            raise ValueError("band predicate needs two distinct streams")

    def band_pairs(self) -> tuple:
        return ((self.stream_a, self.attr_a, self.stream_b, self.attr_b, self.theta),)


class CustomPredicate(JoinPredicate):
    """Arbitrary callable over the full part combination."""

    def __init__(self, fn: Callable[[Sequence[StreamTuple]], bool]):
        self.fn = fn

    def matches(self, parts: Sequence[StreamTuple]) -> bool:
        return bool(self.fn(parts))

    def needs_leaf_check(self) -> bool:
        return True


def parse_predicate(text: str) -> JoinPredicate:
    """Parse a predicate descriptor.

    Forms: "cross", "equi:1.a1=2.a1,2.a1=3.a1", "band:1.x~2.x<5".
    """
    text = text.strip()
    if text == "cross":
        return CrossPredicate()
    kind, sep, body = text.partition(":")
    if not sep:
        raise ValueError(f"bad predicate descriptor {text!r}")
    if kind == "equi":
        pairs = []
        for item in body.split(","):
            left, sep, right = item.partition("=")
            if not sep:
                raise ValueError(f"bad equi term {item!r}")
            pairs.append((_parse_ref(left), _parse_ref(right)))
        return EquiPredicate(pairs)
    if kind == "band":
        expr, sep, theta = body.partition("<")
        if not sep:
            raise ValueError(f"bad band term {body!r}")
        left, sep, right = expr.partition("~")
        if not sep:
            raise ValueError(f"bad band term {expr!r}")
        (sa, aa), (sb, ab) = _parse_ref(left), _parse_ref(right)
        return BandPredicate(sa, aa, sb, ab, float(theta))
    raise ValueError(f"unknown predicate kind {kind!r}")


def _parse_ref(text: str) -> tuple[int, str]:
    stream, sep, attr = text.strip().partition(".")
    if not sep or not attr:
        raise ValueError(f"bad attribute reference {text!r}")
    return int(stream), attr


def output_in_order_check(results: Sequence[ResultTuple]) -> bool:
    """True when result timestamps never decrease."""
    return all(a.ts <= b.ts for a, b in zip(results, results[1:]))


# A probe plan is one _Level per non-trigger stream, visited in ascending
# stream order.  `bucket` names an index lookup that narrows candidates;
# `checks` are residual constraints: ("eq", attr, stream, attr) against an
# already-bound part, or ("selfeq", attr, attr) within the candidate.
@dataclass(frozen=True)
class _Level:
    stream: int
    bucket: tuple[str, int, str] | None   # (own attr, bound stream, bound attr)
    checks: tuple


@dataclass(frozen=True)
class _Plan:
    levels: tuple[_Level, ...]
    trigger_self: tuple[tuple[str, str], ...]


def _equality_classes(pairs) -> list[list[tuple[int, str]]]:
    """Group (stream, attr) nodes into transitively-equal classes."""
    parent: dict = {}

    def find(x):
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in pairs:
        parent[find(a)] = find(b)
    groups: dict = {}
    for node in parent:
        groups.setdefault(find(node), []).append(node)
    return [sorted(members) for members in groups.values()]


class JoinState:
    """Windows, high-water mark and probe machinery for one join query.

    With emit_results=False probes only count matches (the candidate
    space and match counts are still exact); use for measurement runs
    where materialized results are not needed.
    """

    def __init__(self, windows: WindowSpec, predicate: JoinPredicate,
                 use_index: bool = True, emit_results: bool = True):
        predicate.validate(windows.m)
        self.windows = windows
        self.predicate = predicate
        self.use_index = use_index and bool(predicate.equi_pairs())
        self.emit_results = emit_results
        self.t_join = 0
        self.m = windows.m
        self._stores: list[list] = [[] for _ in range(self.m)]
        self._indexed_attrs: list[tuple[str, ...]] = [() for _ in range(self.m)]
        if self.use_index:
            per_stream: dict[int, set] = {}
            for (sa, aa), (sb, ab) in predicate.equi_pairs():
                per_stream.setdefault(sa, set()).add(aa)
                per_stream.setdefault(sb, set()).add(ab)
            for s, names in per_stream.items():
                self._indexed_attrs[s - 1] = tuple(sorted(names))
        self._index: list[dict] = [
            {name: {} for name in names} for names in self._indexed_attrs
        ]
        self._plans: dict[int, _Plan] = {}
        self._is_cross = isinstance(predicate, CrossPredicate)
        self.n_inserted = 0
        self.n_dropped = 0
        self.n_expired = 0

    # -- window maintenance -------------------------------------------------

    def window_size(self, stream: int) -> int:
        return len(self._stores[stream - 1])

    def window_contents(self, stream: int) -> list[StreamTuple]:
        return [entry[2] for entry in self._stores[stream - 1]]

    def resident(self) -> int:
        """Tuples currently held across all windows."""
        return sum(len(s) for s in self._stores)

    def _insert(self, e: StreamTuple) -> None:
        entry = (e.ts, e.seq, e)
        insort(self._stores[e.stream - 1], entry)
        self.n_inserted += 1
        for name in self._indexed_attrs[e.stream - 1]:
            bucket = self._index[e.stream - 1][name].setdefault(e.value(name), [])
            insort(bucket, entry)

    def _expire(self, stream: int, bound: int) -> None:
        """Drop tuples with ts < bound from one window."""
        store = self._stores[stream - 1]
        cut = bisect_left(store, (bound,))
        if not cut:
            return
        expired = store[:cut]
        del store[:cut]
        self.n_expired += cut
        for name in self._indexed_attrs[stream - 1]:
            by_value = self._index[stream - 1][name]
            for entry in expired:
                bucket = by_value[entry[2].value(name)]
                del bucket[0]          # expiry order matches bucket order
                if not bucket:
                    del by_value[entry[2].value(name)]

    # -- probing ------------------------------------------------------------

    def _plan(self, trigger_stream: int) -> _Plan:
        plan = self._plans.get(trigger_stream)
        if plan is not None:
            return plan
        classes = _equality_classes(self.predicate.equi_pairs())
        band = self.predicate.band_pairs()
        trigger_self = []
        for members in classes:
            own = [a for s, a in members if s == trigger_stream]
            trigger_self.extend((own[0], a) for a in own[1:])
        levels = []
        bound = {trigger_stream}
        for j in (j for j in range(1, self.m + 1) if j != trigger_stream):
            checks = []
            bucket = None
            for members in classes:
                own = [a for s, a in members if s == j]
                if not own:
                    continue
                # all of the candidate's attrs in the class must agree
                checks.extend(("selfeq", own[0], a) for a in own[1:])
                src = next(((s, a) for s, a in members if s in bound), None)
                if src is None:
                    continue          # class not bound yet; later levels check
                term = (own[0], src[0], src[1])
                if bucket is None and self.use_index:
                    bucket = term
                else:
                    checks.append(("eq",) + term)
            for sa, aa, sb, ab, theta in band:
                if sa == j and sb in bound:
                    checks.append(("band", aa, sb, ab, theta))
                elif sb == j and sa in bound:
                    checks.append(("band", ab, sa, aa, theta))
            bound.add(j)
            levels.append(_Level(j, bucket, tuple(checks)))
        plan = _Plan(tuple(levels), tuple(trigger_self))
        self._plans[trigger_stream] = plan
        return plan

    def _candidates(self, level: _Level, parts: list) -> list:
        if level.bucket is not None:
            attr, src, src_attr = level.bucket
            value = parts[src - 1].value(src_attr)
            return self._index[level.stream - 1][attr].get(value, ())
        return self._stores[level.stream - 1]

    def _probe(self, trigger: StreamTuple) -> tuple[list[ResultTuple], int]:
        if self._is_cross and not self.emit_results:
            count = prod(
                len(self._stores[j]) for j in range(self.m) if j != trigger.stream - 1
            )
            return [], count
        plan = self._plan(trigger.stream)
        if any(trigger.value(a) != trigger.value(b) for a, b in plan.trigger_self):
            return [], 0
        levels = plan.levels
        parts: list = [None] * self.m
        parts[trigger.stream - 1] = trigger
        results: list[ResultTuple] = []
        leaf_check = self.predicate.needs_leaf_check()
        emit = self.emit_results
        depth = len(levels)
        count = 0

        def walk(li: int) -> None:
            nonlocal count
            level = levels[li]
            cands = self._candidates(level, parts)
            checks = level.checks
            last = li == depth - 1
            if last and not checks and not leaf_check and not emit:
                count += len(cands)
                return
            slot = level.stream - 1
            for _, _, cand in cands:
                ok = True
                for check in checks:
                    if check[0] == "eq":
                        _, attr, src, src_attr = check
                        if cand.value(attr) != parts[src - 1].value(src_attr):
                            ok = False
                            break
                    elif check[0] == "selfeq":
                        _, attr_a, attr_b = check
                        if cand.value(attr_a) != cand.value(attr_b):
                            ok = False
                            break
                    else:
                        _, attr, src, src_attr, theta = check
                        if not abs(cand.value(attr) - parts[src - 1].value(src_attr)) < theta:
                            ok = False
                            break
                if not ok:
                    continue
                parts[slot] = cand
                if last:
                    if leaf_check and not self.predicate.matches(parts):
                        continue
                    count += 1
                    if emit:
                        results.append(ResultTuple(tuple(parts), trigger.ts))
                else:
                    walk(li + 1)
            parts[slot] = None

        if depth == 0:
            if not leaf_check or self.predicate.matches(parts):
                count = 1
                if emit:
                    results.append(ResultTuple(tuple(parts), trigger.ts))
        else:
            walk(0)
        return results, count

    # -- arrival processing ---------------------------------------------------

    def process(self, e: StreamTuple) -> tuple[list[ResultTuple], ProbeRecord]:
        """Handle one arrival from the merged input sequence.

        A trigger (e.ts >= high-water mark, ties included) advances the
        mark, trims and probes the other windows, then joins the window
        of its own stream.  A late arrival is inserted into its window
        only while it can still pair with future triggers.
        """
        delay = e.delay if e.delay is not None else 0
        i = e.stream
        if e.ts >= self.t_join:
            self.t_join = e.ts
            for j in range(1, self.m + 1):
                if j != i:
                    self._expire(j, e.ts - self.windows.extent(j))
            n_cross = prod(
                len(self._stores[j - 1]) for j in range(1, self.m + 1) if j != i
            )
            results, n_join = self._probe(e)
            self._insert(e)
            return results, ProbeRecord(delay, n_cross, n_join, True, e.ts)
        if e.ts > self.t_join - self.windows.extent(i):
            self._insert(e)
        else:
            self.n_dropped += 1
        return [], ProbeRecord(delay, 0, 0, False, e.ts)
