"""Synthetic trace generation.

Each stream emits at a fixed rate on an ideal clock (one tuple every
1000/rate ms); a tuple's timestamp is the ideal emission time minus a
Zipf-distributed delay, so higher delay skew means more in-order tuples.
Join attributes are Zipf-distributed integers whose skew can drift at
random changepoints.  Streams are interleaved by emission step, so the
sources look synchronized to the consumer.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, replace

import numpy as np

from .core import StreamTuple

_cdf_cache: dict[tuple[int, float], np.ndarray] = {}


def _zipf_cdf(n: int, s: float) -> np.ndarray:
    key = (n, round(float(s), 12))
    cdf = _cdf_cache.get(key)
    if cdf is None:
        weights = np.arange(1, n + 1, dtype=float) ** -float(s)
        cdf = np.cumsum(weights / weights.sum())
        cdf[-1] = 1.0
        _cdf_cache[key] = cdf
    return cdf


def zipf_ranks(n: int, s: float, rng: np.random.Generator,
               size: int) -> np.ndarray:
    """`size` draws of ranks in [1, n] with Pr[r] proportional to r^-s."""
    if n < 1:
        raise ValueError("domain size must be positive")
    if s < 0:
        raise ValueError("skew must be non-negative")
    if n == 1:
        return np.ones(size, dtype=np.int64)
    return np.searchsorted(_zipf_cdf(n, s), rng.random(size),
                           side="right").astype(np.int64) + 1


def zipf_sample(n: int, s: float, rng: np.random.Generator) -> int:
    """One draw of a rank in [1, n] with Pr[r] proportional to r^-s."""
    return int(zipf_ranks(n, s, rng, 1)[0])


@dataclass(frozen=True)
class AttrSpec:
    """One integer join attribute in [1, domain], Zipf with optional drift.

    With delay_correlated set, delayed tuples keep the plain rank order
    (mass near value 1) while in-order tuples get the flipped order, so
    the frequent values sit preferentially on delayed tuples.
    """

    name: str
    domain: int = 100
    skew: float = 0.0
    drift: tuple[float, float] | None = None
    drift_interval_ms: tuple[int, int] = (60_000, 600_000)
    delay_correlated: bool = False

    def validate(self) -> None:
        if self.domain < 1:
            raise ValueError("attribute domain must be positive")
        if self.skew < 0:
            raise ValueError("attribute skew must be non-negative")
        if self.drift is not None and not 0 <= self.drift[0] <= self.drift[1]:
            raise ValueError("bad drift range")
        lo, hi = self.drift_interval_ms
        if not 0 < lo <= hi:
            raise ValueError("bad drift interval range")


@dataclass(frozen=True)
class StreamGenSpec:
    """Generation parameters for one stream."""

    rate_per_sec: int
    duration_ms: int
    max_delay_ms: int
    delay_skew: float
    delay_step_ms: int = 10
    ts_lag_ms: int = 0
    attrs: tuple[AttrSpec, ...] = ()

    def validate(self) -> None:
        if self.rate_per_sec <= 0 or 1000 % self.rate_per_sec != 0:
            raise ValueError("rate must be a positive divisor of 1000/s")
        if self.duration_ms <= 0:
            raise ValueError("duration must be positive")
        if self.max_delay_ms < 0 or self.delay_skew < 0:
            raise ValueError("delay parameters must be non-negative")
        if self.delay_step_ms <= 0:
            raise ValueError("delay step must be positive")
        if self.max_delay_ms % self.delay_step_ms != 0:
            raise ValueError("max delay must be a multiple of the delay step")
        if self.ts_lag_ms < 0:
            raise ValueError("timestamp lag must be non-negative")
        for a in self.attrs:
            a.validate()

    @property
    def step_ms(self) -> int:
        return 1000 // self.rate_per_sec

    @property
    def count(self) -> int:
        return self.duration_ms // self.step_ms


@dataclass(frozen=True)
class TraceGenSpec:
    streams: tuple[StreamGenSpec, ...]
    seed: int = 0

    def validate(self) -> None:
        if not self.streams:
            raise ValueError("need at least one stream")
        for s in self.streams:
            s.validate()


@dataclass(frozen=True)
class StreamFragment:
    """One generated stream plus the emission step used to interleave."""

    stream: int
    step_ms: int
    tuples: tuple[StreamTuple, ...]


def _skew_schedule(spec: AttrSpec, duration_ms: int,
                   rng: np.random.Generator) -> list[tuple[int, float]]:
    """Piecewise-constant skew as (segment start ms, skew) breakpoints."""
    segments = [(0, spec.skew)]
    if spec.drift is None:
        return segments
    lo, hi = spec.drift_interval_ms
    t = int(rng.integers(lo, hi + 1))
    while t < duration_ms:
        segments.append((t, float(rng.uniform(spec.drift[0], spec.drift[1]))))
        t += int(rng.integers(lo, hi + 1))
    return segments


def _attr_values(spec: AttrSpec, emit_ms: np.ndarray, delayed: np.ndarray,
                 duration_ms: int, rng: np.random.Generator) -> np.ndarray:
    values = np.empty(len(emit_ms), dtype=np.int64)
    schedule = _skew_schedule(spec, duration_ms, rng)
    bounds = [start for start, _ in schedule[1:]] + [duration_ms + 1]
    for (start, skew), end in zip(schedule, bounds):
        mask = (emit_ms > start) & (emit_ms <= end)
        n = int(mask.sum())
        if n == 0:
            continue
        ranks = zipf_ranks(spec.domain, skew, rng, n)
        vals = ranks.copy()
        if spec.delay_correlated:
            flip = ~delayed[mask]
            vals[flip] = spec.domain + 1 - ranks[flip]
        values[mask] = vals
    return values


def generate_stream(spec: StreamGenSpec, stream_id: int,
                    rng: np.random.Generator) -> StreamFragment:
    """Generate one stream's tuples in arrival order (seq not yet assigned)."""
    spec.validate()
    n = spec.count
    step = spec.step_ms
    emit_ms = np.arange(1, n + 1, dtype=np.int64) * step
    n_delay_values = spec.max_delay_ms // spec.delay_step_ms + 1
    delay_ranks = zipf_ranks(n_delay_values, spec.delay_skew, rng, n)
    delays = (delay_ranks - 1) * spec.delay_step_ms
    ts = np.maximum(1, emit_ms - spec.ts_lag_ms - delays)
    attr_values = [
        _attr_values(a, emit_ms, delays > 0, spec.duration_ms, rng)
        for a in spec.attrs
    ]
    names = [a.name for a in spec.attrs]
    tuples = tuple(
        StreamTuple(
            stream=stream_id,
            seq=0,
            ts=int(ts[i]),
            attrs=tuple((name, int(col[i])) for name, col in zip(names, attr_values)),
        )
        for i in range(n)
    )
    return StreamFragment(stream_id, step, tuples)


def _emission_run(f: StreamFragment):
    return (((i + 1) * f.step_ms, f.stream, e) for i, e in enumerate(f.tuples))


def interleave(fragments) -> list[StreamTuple]:
    """Merge fragments by emission step (ties by stream); assign seq 1..N."""
    merged = heapq.merge(*[_emission_run(f) for f in fragments])
    return [replace(e, seq=i) for i, (_, _, e) in enumerate(merged, start=1)]


def generate_trace(spec: TraceGenSpec) -> list[StreamTuple]:
    """Deterministic trace for a spec: per-stream child seeds, then merge."""
    spec.validate()
    seeds = np.random.SeedSequence(spec.seed).spawn(len(spec.streams))
    fragments = [
        generate_stream(s, i + 1, np.random.default_rng(seed))
        for i, (s, seed) in enumerate(zip(spec.streams, seeds))
    ]
    return interleave(fragments)


def parse_genspec(text: str) -> TraceGenSpec:
    """Parse a flat key=value generation spec.

    Global keys: streams, seed, rate, duration_ms, max_delay_ms,
    delay_step_ms, delay_skew, ts_lag_ms, attrs (comma-separated names).
    Any of rate/delay_skew/ts_lag_ms may be overridden per stream with a
    `.N` suffix.  Attribute keys: attr.NAME.domain, attr.NAME.skew,
    attr.NAME.drift (lo,hi), attr.NAME.drift_interval_ms (lo,hi),
    attr.NAME.delay_correlated.
    """
    from .config import parse_kv

    kv = parse_kv(text)

    def get(key: str, default=None):
        return kv.get(key, default)

    def get_stream(key: str, stream: int, default):
        return kv.get(f"{key}.{stream}", kv.get(key, default))

    m = int(get("streams", 0))
    if m < 1:
        raise ValueError("generation spec needs streams >= 1")
    attr_names = [a for a in str(get("attrs", "")).split(",") if a]
    attrs = []
    for name in attr_names:
        drift = get(f"attr.{name}.drift")
        drift_t = None
        if drift is not None:
            lo, hi = str(drift).split(",")
            drift_t = (float(lo), float(hi))
        interval = str(get(f"attr.{name}.drift_interval_ms", "60000,600000"))
        ilo, ihi = interval.split(",")
        attrs.append(AttrSpec(
            name=name,
            domain=int(get(f"attr.{name}.domain", 100)),
            skew=float(get(f"attr.{name}.skew", 0.0)),
            drift=drift_t,
            drift_interval_ms=(int(ilo), int(ihi)),
            delay_correlated=str(get(f"attr.{name}.delay_correlated",
                                     "false")).lower() == "true",
        ))
    streams = tuple(
        StreamGenSpec(
            rate_per_sec=int(get_stream("rate", i, 100)),
            duration_ms=int(get("duration_ms", 60_000)),
            max_delay_ms=int(get("max_delay_ms", 2_000)),
            delay_skew=float(get_stream("delay_skew", i, 2.0)),
            delay_step_ms=int(get("delay_step_ms", 10)),
            ts_lag_ms=int(get_stream("ts_lag_ms", i, 0)),
            attrs=tuple(attrs),
        )
        for i in range(1, m + 1)
    )
    return TraceGenSpec(streams=streams, seed=int(get("seed", 0)))
