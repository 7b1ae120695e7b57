"""Runtime statistics over raw (pre-buffer) arrivals.

Per stream we keep an adaptive history window of tuple delays (an
exponential-histogram change detector shrinks the window when the mean
delay shifts), from which delay histograms, maximum delay and arrival
rate are derived.  A skew monitor keeps the same kind of adaptive
average over each stream's lag behind the most advanced stream, which
estimates the extra reordering slack the downstream merge provides for
free.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass


class NoStatistics(RuntimeError):
    """Raised when a statistic is requested from an empty history."""


def coarse_delay(delay: int, g: int) -> int:
    """Coarse delay bin: 0 only for exact zero, else d covers ((d-1)g, dg]."""
    if delay < 0:
        raise ValueError("delay must be non-negative")
    if delay == 0:
        return 0
    return -(-delay // g)


@dataclass(frozen=True)
class DelayHistogram:
    """Probability masses over coarse delay bins 0..len(masses)-1."""

    granularity: int
    masses: tuple[float, ...]
    sample_count: int

    def mass(self, d: int) -> float:
        if 0 <= d < len(self.masses):
            return self.masses[d]
        return 0.0

    def bins(self) -> dict[int, float]:
        return {d: m for d, m in enumerate(self.masses) if m > 0.0}

    def max_bin(self) -> int:
        return len(self.masses) - 1

    @classmethod
    def from_bins(cls, granularity: int, bins: dict[int, float],
                  sample_count: int = 0) -> DelayHistogram:
        top = max(bins) if bins else 0
        masses = tuple(bins.get(d, 0.0) for d in range(top + 1))
        return cls(granularity, masses, sample_count)


class AdaptiveWindow:
    """Adaptive sliding window over a numeric sequence.

    Exponential-histogram buckets keep memory logarithmic; every
    `check_every` insertions the window is scanned for a split whose two
    sides have means that differ beyond a confidence bound at level
    `delta`, and the older side is dropped while any such split exists.
    """

    def __init__(self, delta: float = 0.01, max_buckets: int = 5,
                 check_every: int = 32):
        self.delta = delta
        self.max_buckets = max_buckets
        self.check_every = check_every
        # rows[r] holds (total, sq_total) buckets of 2**r samples,
        # oldest first; row order: rows[0] is the newest granularity.
        self._rows: list[list[tuple[float, float]]] = [[]]
        self._count = 0
        self._total = 0.0
        self._sq_total = 0.0
        self._since_check = 0

    @property
    def count(self) -> int:
        return self._count

    @property
    def total(self) -> float:
        return self._total

    @property
    def mean(self) -> float:
        if not self._count:
            raise NoStatistics("empty window")
        return self._total / self._count

    def _variance(self) -> float:
        if self._count < 2:
            return 0.0
        return max(0.0, (self._sq_total - self._total ** 2 / self._count) / self._count)

    def add(self, x: float) -> int:
        """Insert a sample; return how many old samples were dropped."""
        self._rows[0].append((x, x * x))
        self._count += 1
        self._total += x
        self._sq_total += x * x
        r = 0
        while len(self._rows[r]) > self.max_buckets:
            if r + 1 == len(self._rows):
                self._rows.append([])
            a = self._rows[r].pop(0)
            b = self._rows[r].pop(0)
            self._rows[r + 1].append((a[0] + b[0], a[1] + b[1]))
            r += 1
        self._since_check += 1
        if self._since_check >= self.check_every:
            self._since_check = 0
            return self._shrink()
        return 0

    def _oldest_row(self) -> int:
        for r in range(len(self._rows) - 1, -1, -1):
            if self._rows[r]:
                return r
        return -1

    def _drop_oldest_bucket(self) -> int:
        r = self._oldest_row()
        total, sq = self._rows[r].pop(0)
        size = 1 << r
        self._count -= size
        self._total -= total
        self._sq_total -= sq
        return size

    def _has_cut(self) -> bool:
        n = self._count
        if n < 2:
            return False
        variance = self._variance()
        log_term = math.log(2.0 * n / self.delta)
        n0 = 0
        sum0 = 0.0
        # walk buckets oldest -> newest, testing each boundary
        for r in range(len(self._rows) - 1, -1, -1):
            size = 1 << r
            for total, _ in self._rows[r]:
                n0 += size
                sum0 += total
                n1 = n - n0
                if n1 <= 0:
                    break
                mh = 1.0 / (1.0 / n0 + 1.0 / n1)
                eps = math.sqrt(2.0 * variance * log_term / mh) \
                    + 2.0 * log_term / (3.0 * mh)
                if abs(sum0 / n0 - (self._total - sum0) / n1) > eps:
                    return True
        return False

    def _shrink(self) -> int:
        dropped = 0
        while self._has_cut():
            dropped += self._drop_oldest_bucket()
        return dropped


class DelayStats:
    """Adaptive delay history for one stream.

    Tracks the raw delay samples currently in the adaptive window,
    together with each sample's arrival local time (for rate
    estimation) and exact delay-value counts (for histograms and the
    running maximum).
    """

    def __init__(self, delta: float = 0.01, max_buckets: int = 5,
                 check_every: int = 32):
        self._window = AdaptiveWindow(delta, max_buckets, check_every)
        self._samples: deque[tuple[int, int]] = deque()
        self._value_counts: dict[int, int] = {}
        self._max = 0

    @property
    def count(self) -> int:
        return self._window.count

    def record_delay(self, delay: int, arrival_local_ms: int) -> None:
        dropped = self._window.add(delay)
        self._samples.append((delay, arrival_local_ms))
        self._value_counts[delay] = self._value_counts.get(delay, 0) + 1
        if delay > self._max:
            self._max = delay
        refresh_max = False
        for _ in range(dropped):
            old, _ts = self._samples.popleft()
            left = self._value_counts[old] - 1
            if left:
                self._value_counts[old] = left
            else:
                del self._value_counts[old]
                if old == self._max:
                    refresh_max = True
        if refresh_max:
            self._max = max(self._value_counts) if self._value_counts else 0

    def snapshot_pdf(self, g: int) -> DelayHistogram:
        """Histogram of the current window at granularity g."""
        n = self._window.count
        if not n:
            raise NoStatistics("no delay samples")
        bins: dict[int, int] = {}
        for value, cnt in self._value_counts.items():
            d = coarse_delay(value, g)
            bins[d] = bins.get(d, 0) + cnt
        top = max(bins)
        masses = tuple(bins.get(d, 0) / n for d in range(top + 1))
        return DelayHistogram(g, masses, n)

    def max_observed_delay(self) -> int:
        if not self._window.count:
            raise NoStatistics("no delay samples")
        return self._max

    def arrival_rate(self) -> float:
        """Arrivals per second of logical time across the current window."""
        n = self._window.count
        if n < 2:
            raise NoStatistics("need at least two samples for a rate")
        span_ms = self._samples[-1][1] - self._samples[0][1]
        if span_ms <= 0:
            raise NoStatistics("zero logical-time span")
        return (n - 1) * 1000.0 / span_ms


class SkewMonitor:
    """Adaptive averages of each stream's implicit merge slack.

    A tuple of the stream whose local time runs ahead waits inside the
    timestamp merge until the slowest stream catches up, which absorbs
    that much of its disorder for free.  At every raw arrival each
    stream's local-time lead over the slowest stream is one sample; the
    estimate subtracts the smallest per-stream average so the slowest
    stream reads zero.
    """

    def __init__(self, m: int, delta: float = 0.01, max_buckets: int = 5,
                 check_every: int = 32):
        self.m = m
        self._windows = [AdaptiveWindow(delta, max_buckets, check_every)
                         for _ in range(m)]

    def sample(self, local_times: list[int]) -> None:
        low = min(local_times)
        for i, t in enumerate(local_times):
            self._windows[i].add(t - low)

    def estimate_ksync(self) -> list[float]:
        """Per-stream extra slack, smallest entry exactly 0."""
        if any(not w.count for w in self._windows):
            return [0.0] * self.m
        avgs = [w.mean for w in self._windows]
        base = min(avgs)
        return [a - base for a in avgs]


@dataclass
class StatsSnapshot:
    """Everything the adaptation step needs, frozen at one instant.

    Per-stream entries are None when that stream has no usable history
    yet (cold start).
    """

    pdfs: list
    rates: list
    ksync: list[float]
    max_delay: int | None


class StatisticsManager:
    """Per-stream delay histories plus the cross-stream skew monitor."""

    def __init__(self, m: int, g: int, delta: float = 0.01,
                 max_buckets: int = 5, check_every: int = 32):
        self.m = m
        self.g = g
        self.delays = [DelayStats(delta, max_buckets, check_every)
                       for _ in range(m)]
        self.skew = SkewMonitor(m, delta, max_buckets, check_every)

    def on_arrival(self, stream: int, delay: int, local_ms: int,
                   local_times: list[int], all_started: bool) -> None:
        self.delays[stream - 1].record_delay(delay, local_ms)
        if all_started:
            self.skew.sample(local_times)

    def snapshot(self) -> StatsSnapshot:
        pdfs = []
        rates = []
        max_delay = None
        for st in self.delays:
            try:
                pdfs.append(st.snapshot_pdf(self.g))
                d = st.max_observed_delay()
                max_delay = d if max_delay is None else max(max_delay, d)
            except NoStatistics:
                pdfs.append(None)
            try:
                rates.append(st.arrival_rate())
            except NoStatistics:
                rates.append(None)
        return StatsSnapshot(pdfs, rates, self.skew.estimate_ksync(), max_delay)
