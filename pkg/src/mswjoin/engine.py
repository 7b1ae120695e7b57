"""End-to-end pipeline: per-stream slack buffers -> merge -> join.

Arrivals go through their stream's reordering buffer, released tuples
through the timestamp merge, and merged tuples into the join.  A single
uniform slack governs all buffers; it can be changed mid-run and the
buffers re-drain immediately.
"""
from __future__ import annotations

from dataclasses import dataclass

from .core import StreamClock, StreamTuple, WindowSpec
from .join import JoinPredicate, JoinState, ProbeRecord, ResultTuple
from .kslack import KSlackBuffer
from .synchronizer import Synchronizer


@dataclass
class PushOutcome:
    """What one arrival (or the final flush) caused downstream."""

    delay: int
    results: list[ResultTuple]
    records: list[ProbeRecord]


class JoinPipeline:
    """Single-threaded disorder-handling join over m interleaved streams."""

    def __init__(self, windows: WindowSpec, predicate: JoinPredicate,
                 k: int | tuple = 0, use_index: bool = True,
                 emit_results: bool = True):
        self.windows = windows
        self.m = windows.m
        ks = (k,) * self.m if isinstance(k, int) else tuple(k)
        if len(ks) != self.m:
            raise ValueError("need one slack per stream")
        if any(ki < 0 for ki in ks):
            raise ValueError("slack must be non-negative")
        self.clocks = [StreamClock() for _ in range(self.m)]
        self.buffers = [KSlackBuffer(ki, clock)
                        for ki, clock in zip(ks, self.clocks)]
        self.sync = Synchronizer(self.m)
        self.join = JoinState(windows, predicate, use_index=use_index,
                              emit_results=emit_results)
        # uniform slack; the max when constructed heterogeneous
        self.k = max(ks)
        self.pushed = 0
        self.max_delay_seen = 0
        self.finished = False

    @property
    def global_time(self) -> int:
        """Largest timestamp observed on any stream."""
        return max(c.local_time for c in self.clocks)

    def local_times(self) -> tuple[int, ...]:
        return tuple(c.local_time for c in self.clocks)

    def all_started(self) -> bool:
        return all(c.started for c in self.clocks)

    def _through_join(self, released) -> tuple[list, list]:
        results: list[ResultTuple] = []
        records: list[ProbeRecord] = []
        for r in released:
            for merged in self.sync.offer(r):
                out, record = self.join.process(merged)
                results.extend(out)
                records.append(record)
        return results, records

    def push(self, e: StreamTuple) -> PushOutcome:
        if self.finished:
            raise RuntimeError("pipeline already finished")
        if not 1 <= e.stream <= self.m:
            raise ValueError(f"stream {e.stream} out of range")
        self.pushed += 1
        released = self.buffers[e.stream - 1].push(e)
        delay = self.clocks[e.stream - 1].local_time - e.ts
        if delay > self.max_delay_seen:
            self.max_delay_seen = delay
        results, records = self._through_join(released)
        return PushOutcome(delay, results, records)

    def set_k(self, k: int) -> PushOutcome:
        """Change the uniform slack; shrinking releases overdue tuples."""
        if k < 0:
            raise ValueError("slack must be non-negative")
        self.k = k
        released: list[StreamTuple] = []
        for buf in self.buffers:
            released.extend(buf.set_k(k))
        results, records = self._through_join(released)
        return PushOutcome(0, results, records)

    def finish(self) -> PushOutcome:
        """Drain buffers and merge; afterwards the pipeline is closed."""
        if self.finished:
            raise RuntimeError("pipeline already finished")
        self.finished = True
        results: list[ResultTuple] = []
        records: list[ProbeRecord] = []
        for i, buf in enumerate(self.buffers, start=1):
            out, recs = self._through_join(buf.flush())
            results.extend(out)
            records.extend(recs)
            for merged in self.sync.close_stream(i):
                row, record = self.join.process(merged)
                results.extend(row)
                records.append(record)
        for merged in self.sync.flush():
            row, record = self.join.process(merged)
            results.extend(row)
            records.append(record)
        return PushOutcome(0, results, records)

    def reconcile(self) -> dict:
        """Account for every pushed tuple; raises if any went missing.

        Valid after finish(): buffers and merge are empty, so each tuple
        was either dropped as too late, expired out of its window, or is
        still resident in a window.
        """
        counts = {
            "pushed": self.pushed,
            "inserted": self.join.n_inserted,
            "dropped_late": self.join.n_dropped,
            "expired": self.join.n_expired,
            "resident": self.join.resident(),
            "buffered": (sum(len(b) for b in self.buffers)
                         + sum(self.sync.pending(i)
                               for i in range(1, self.m + 1))),
        }
        total = (counts["dropped_late"] + counts["expired"]
                 + counts["resident"] + counts["buffered"])
        if total != counts["pushed"]:
            raise RuntimeError(f"tuple accounting mismatch: {counts}")
        return counts
