"""Core stream types: timestamped tuples, per-stream clocks, trace files.

Timestamps are integer milliseconds. A stream's local time is the largest
timestamp seen so far on that stream; a tuple's delay is how far behind
that local time it arrived.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Iterator, TextIO


class TraceFormatError(ValueError):
    """Raised for a malformed trace line; carries the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True)
class StreamTuple:
    """One stream element.

    Attributes:
        stream: 1-based index of the originating stream.
        seq: arrival sequence number, strictly increasing in arrival order.
        ts: event timestamp in ms.
        attrs: ordered (name, value) pairs; values are int or float.
        delay: lateness in ms relative to the stream's local time at
            arrival; None until a reordering buffer annotates it.
    """

    stream: int
    seq: int
    ts: int
    attrs: tuple[tuple[str, int | float], ...] = ()
    delay: int | None = None

    def value(self, name: str):
        for n, v in self.attrs:
            if n == name:
                return v
        raise KeyError(f"tuple has no attribute {name!r}")

    def with_delay(self, delay: int) -> StreamTuple:
        return replace(self, delay=delay)

    def order_key(self) -> tuple[int, int]:
        """(ts, seq) ordering used by reordering buffers and windows."""
        return (self.ts, self.seq)


@dataclass
class StreamClock:
    """Running-max clock over one stream's tuple timestamps.

    local_time starts at 0, i.e. before any tuple.  Mutated only by its
    owning component.
    """

    local_time: int = 0
    started: bool = False

    def observe(self, e: StreamTuple) -> int:
        """Advance to max(local_time, e.ts) and return the tuple's delay.

        The returned delay is measured against the updated local time, so
        an in-order tuple has delay 0.
        """
        if e.ts > self.local_time:
            self.local_time = e.ts
        self.started = True
        return self.local_time - e.ts


def skew(a: StreamClock, b: StreamClock) -> int:
    """Absolute local-time difference between two streams."""
    return abs(a.local_time - b.local_time)


@dataclass(frozen=True)
class WindowSpec:
    """Per-stream window extents in ms, index 1..m."""

    sizes: tuple[int, ...]

    def __post_init__(self):
        if not self.sizes or any(w <= 0 for w in self.sizes):
            raise ValueError("window extents must be positive")

    @property
    def m(self) -> int:
        return len(self.sizes)

    def extent(self, stream: int) -> int:
        return self.sizes[stream - 1]


def _format_value(v) -> str:
    if isinstance(v, bool):
        raise TypeError("attribute values must be int or float")
    if isinstance(v, int):
        return str(v)
    return repr(float(v))


def _parse_value(s: str):
    try:
        return int(s)
    except ValueError:
        return float(s)


def _parse_line(line: str, line_no: int) -> tuple:
    parts = line.split("\t")
    if len(parts) not in (2, 3):
        raise TraceFormatError(line_no, "expected stream<TAB>ts<TAB>attrs")
    try:
        stream = int(parts[0])
        ts = int(parts[1])
    except ValueError as exc:
        raise TraceFormatError(line_no, str(exc)) from None
    if stream < 1:
        raise TraceFormatError(line_no, f"stream index must be >= 1, got {stream}")
    if ts < 1:
        raise TraceFormatError(line_no, f"timestamp must be >= 1, got {ts}")
    attrs = []
    if len(parts) == 3 and parts[2]:
        for item in parts[2].split(","):
            name, sep, raw = item.partition("=")
            if not sep or not name:
                raise TraceFormatError(line_no, f"bad attribute {item!r}")
            try:
                attrs.append((name, _parse_value(raw)))
            except ValueError:
                raise TraceFormatError(line_no, f"bad attribute value {raw!r}") from None
    return stream, ts, tuple(attrs)


def iter_trace(lines: Iterable[str]) -> Iterator[StreamTuple]:
    """Parse trace lines into tuples; file order is global arrival order.

    Lines starting with '#' and blank lines are skipped.  seq is assigned
    positionally (1, 2, 3, ...) over the tuple lines.
    """
    seq = 0
    for line_no, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        seq += 1
        stream, ts, attrs = _parse_line(line, line_no)
        yield StreamTuple(stream=stream, seq=seq, ts=ts, attrs=attrs)


def read_trace(path) -> list:
    with open(path, "r", encoding="utf-8") as fh:
        return list(iter_trace(fh))


def format_tuple(e: StreamTuple) -> str:
    attrs = ",".join(f"{n}={_format_value(v)}" for n, v in e.attrs)
    return f"{e.stream}\t{e.ts}\t{attrs}"


def write_trace(tuples: Iterable[StreamTuple], path_or_file) -> None:
    """Write tuples in arrival order; reading the file back is identity
    (modulo delay annotations, which are runtime-only)."""

    def _write(fh: TextIO):
        for e in tuples:
            fh.write(format_tuple(e))
            fh.write("\n")

    if hasattr(path_or_file, "write"):
        _write(path_or_file)
    else:
        with open(path_or_file, "w", encoding="utf-8") as fh:
            _write(fh)
