"""Inter-stream synchronizer.

Merges m per-stream sequences into one output sequence.  A tuple whose
timestamp is above the merge frontier waits in a per-stream queue; the
frontier advances (releasing queued tuples in global timestamp order)
only while every live stream has something queued, so a slow stream
implicitly buffers the fast ones.  A tuple at or below the frontier is
passed through immediately, preserving its disorder for downstream
handling.
"""
from __future__ import annotations

import heapq

from .core import StreamTuple


class Synchronizer:
    """m-way timestamp merge with out-of-order passthrough."""

    def __init__(self, m: int):
        if m < 1:
            raise ValueError("need at least one stream")
        self.m = m
        self.t_sync = 0
        self._queues: list[list[tuple[int, int, StreamTuple]]] = [[] for _ in range(m)]
        self._closed = [False] * m

    def pending(self, stream: int) -> int:
        return len(self._queues[stream - 1])

    def _ready(self) -> bool:
        return all(q or self._closed[i] for i, q in enumerate(self._queues))

    def _release(self) -> list[StreamTuple]:
        out = []
        while any(self._queues) and self._ready():
            low = min(q[0][0] for q in self._queues if q)
            self.t_sync = low
            batch = []
            for q in self._queues:
                while q and q[0][0] == low:
                    batch.append(heapq.heappop(q)[2])
            batch.sort(key=lambda e: (e.stream, e.seq))
            out.extend(batch)
        return out

    def offer(self, e: StreamTuple) -> list[StreamTuple]:
        """Ingest one tuple; return tuples emitted downstream.

        Queued tuples come out grouped by ascending timestamp, ties in
        (stream, seq) order.  A tuple with ts <= the current frontier is
        emitted by itself, immediately.
        """
        if e.ts > self.t_sync:
            q = self._queues[e.stream - 1]
            heapq.heappush(q, (e.ts, e.seq, e))
            return self._release()
        return [e]

    def close_stream(self, stream: int) -> list[StreamTuple]:
        """Mark a stream finished so it no longer gates the frontier."""
        self._closed[stream - 1] = True
        return self._release()

    def flush(self) -> list[StreamTuple]:
        """Drain every queue in (ts, stream, seq) order."""
        rest = []
        for q in self._queues:
            rest.extend(item[2] for item in q)
            q.clear()
        rest.sort(key=lambda e: (e.ts, e.stream, e.seq))
        if rest:
            self.t_sync = max(self.t_sync, rest[-1].ts)
        return rest
