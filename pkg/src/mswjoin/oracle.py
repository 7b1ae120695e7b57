"""Ground truth and recall evaluation.

The true result set of a query is what the join produces on globally
sorted, synchronized input; recall of a live run is measured against it
over a trailing window of result timestamps.  Matching is by result
identity (the (stream, seq) of every part), not by timestamp, but the
window test always uses the truth-side timestamp.
"""
from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field

from .core import StreamTuple, WindowSpec
from .join import JoinPredicate, JoinState, ResultTuple

Identity = tuple[tuple[int, int], ...]


class TimestampedCounts:
    """Result counts keyed by a non-decreasing timestamp sequence.

    Supports O(log n) counting over half-open windows (lo, hi].
    """

    def __init__(self):
        self._ts: list[int] = []
        self._cum: list[int] = []

    def add(self, ts: int, n: int = 1) -> None:
        if n <= 0:
            return
        if self._ts and ts < self._ts[-1]:
            raise ValueError("timestamps must be non-decreasing")
        if self._ts and ts == self._ts[-1]:
            self._cum[-1] += n
        else:
            self._ts.append(ts)
            self._cum.append((self._cum[-1] if self._cum else 0) + n)

    @property
    def total(self) -> int:
        return self._cum[-1] if self._cum else 0

    def count_upto(self, ts: int) -> int:
        """Results with timestamp <= ts."""
        i = bisect_right(self._ts, ts)
        return self._cum[i - 1] if i else 0

    def count_in(self, lo: int, hi: int) -> int:
        """Results with timestamp in (lo, hi]."""
        return self.count_upto(hi) - self.count_upto(lo)


@dataclass
class TrueResultSet:
    """Complete join output of a trace: identities with their timestamps."""

    by_identity: dict[Identity, int] = field(default_factory=dict)
    counts: TimestampedCounts = field(default_factory=TimestampedCounts)

    def add(self, result: ResultTuple) -> None:
        self.by_identity[result.identity()] = result.ts
        self.counts.add(result.ts)

    def __len__(self) -> int:
        return len(self.by_identity)

    def __contains__(self, identity: Identity) -> bool:
        return identity in self.by_identity


def _sorted_replay(trace, windows: WindowSpec, predicate: JoinPredicate,
                   emit_results: bool):
    join = JoinState(windows, predicate, emit_results=emit_results)
    for e in sorted(trace, key=lambda e: (e.ts, e.stream, e.seq)):
        yield join.process(e)


def compute_truth(trace, windows: WindowSpec,
                  predicate: JoinPredicate) -> TrueResultSet:
    """Run the join over the globally sorted trace and keep every result."""
    truth = TrueResultSet()
    for results, _ in _sorted_replay(trace, windows, predicate, True):
        for r in results:
            truth.add(r)
    return truth


def compute_truth_counts(trace, windows: WindowSpec,
                         predicate: JoinPredicate) -> TimestampedCounts:
    """Per-timestamp true result counts without materializing results.

    Sorted replay emits results in non-decreasing timestamp order and
    never produces the same combination twice, so counting matches per
    trigger gives the same per-window totals as compute_truth.
    """
    counts = TimestampedCounts()
    for _, record in _sorted_replay(trace, windows, predicate, False):
        counts.add(record.ts, record.n_join)
    return counts


def recall_at(truth: TrueResultSet, produced, t: int, period_ms: int) -> float:
    """Fraction of true results with ts in (t - P, t] present in produced.

    `produced` is a collection of result identities.  An empty truth
    window counts as fully recalled.
    """
    lo, hi = t - period_ms, t
    denom = truth.counts.count_in(lo, hi)
    if denom == 0:
        return 1.0
    hit = 0
    for identity in set(produced):
        ts = truth.by_identity.get(identity)
        if ts is not None and lo < ts <= hi:
            hit += 1
    return hit / denom


@dataclass(frozen=True)
class RecallSample:
    """One measurement, taken right before an adaptation tick."""

    ts: int
    gamma: float
    k_ms: int
    produced_in_period: int
    true_in_period: int


@dataclass
class RecallSeries:
    """γ(P) samples over a run, with the warmup span marked for exclusion."""

    start_ts: int
    period_ms: int
    samples: list[RecallSample] = field(default_factory=list)

    def add(self, sample: RecallSample) -> None:
        if not 0.0 <= sample.gamma <= 1.0:
            raise ValueError("recall out of range")
        self.samples.append(sample)

    def measured(self) -> list[RecallSample]:
        """Samples past the warmup: ts strictly beyond start + P."""
        cutoff = self.start_ts + self.period_ms
        return [s for s in self.samples if s.ts > cutoff]


def phi(series: RecallSeries, gamma: float) -> float:
    """Fraction of post-warmup samples whose recall is >= gamma."""
    kept = series.measured()
    if not kept:
        raise ValueError("no recall samples beyond the warmup period")
    return sum(1 for s in kept if s.gamma >= gamma) / len(kept)


def mean_gamma(series: RecallSeries) -> float:
    kept = series.measured()
    if not kept:
        raise ValueError("no recall samples beyond the warmup period")
    return sum(s.gamma for s in kept) / len(kept)
