"""Shared test helpers."""
from __future__ import annotations

from mswjoin import StreamTuple


def tup(stream: int, seq: int, ts: int, **attrs) -> StreamTuple:
    """Terse StreamTuple builder; attrs given as keyword arguments."""
    return StreamTuple(stream=stream, seq=seq, ts=ts,
                       attrs=tuple(sorted(attrs.items())))


def feed(trace) -> list[StreamTuple]:
    """Assign arrival seq numbers 1..n to (stream, ts[, attrs]) rows."""
    out = []
    for i, row in enumerate(trace, start=1):
        stream, ts = row[0], row[1]
        attrs = row[2] if len(row) > 2 else {}
        out.append(tup(stream, i, ts, **attrs))
    return out
