"""K-slack reordering buffer.

Holds each tuple until the stream's local time has moved at least k ms
past the tuple's timestamp, then releases held tuples in (ts, seq) order.
A tuple delayed by more than k is released late (still in buffer order),
so downstream components see its residual disorder.

Releases happen only when a new arrival advances the stream's local
time; a late arrival that does not advance the clock is queued without
triggering any release.
"""
from __future__ import annotations

import heapq

from .core import StreamClock, StreamTuple


class KSlackBuffer:
    """Per-stream reordering buffer with adjustable slack k (ms)."""

    def __init__(self, k: int = 0, clock: StreamClock | None = None):
        if k < 0:
            raise ValueError("slack must be non-negative")
        self.k = k
        self.clock = clock if clock is not None else StreamClock()
        self._heap: list[tuple[int, int, StreamTuple]] = []

    def __len__(self) -> int:
        return len(self._heap)

    def _drain_due(self) -> list[StreamTuple]:
        bound = self.clock.local_time - self.k
        out = []
        while self._heap and self._heap[0][0] <= bound:
            out.append(heapq.heappop(self._heap)[2])
        return out

    def push(self, e: StreamTuple) -> list[StreamTuple]:
        """Ingest one tuple; return tuples released by this arrival.

        The tuple is annotated with its arrival delay before being
        buffered.  Released tuples come out in (ts, seq) order.
        """
        before = self.clock.local_time
        delay = self.clock.observe(e)
        held = e.with_delay(delay)
        heapq.heappush(self._heap, (held.ts, held.seq, held))
        if self.clock.local_time > before:
            return self._drain_due()
        return []

    def set_k(self, k_new: int) -> list[StreamTuple]:
        """Change the slack; a decrease releases newly due tuples at once."""
        if k_new < 0:
            raise ValueError("slack must be non-negative")
        self.k = k_new
        return self._drain_due()

    def flush(self) -> list[StreamTuple]:
        """Release everything still held, in (ts, seq) order."""
        out = []
        while self._heap:
            out.append(heapq.heappop(self._heap)[2])
        return out
