"""Analytical recall model for the buffered m-way window join.

Given per-stream delay histograms, arrival rates and window extents,
the model predicts the fraction of true results the join will produce
when every stream's reordering buffer runs with slack k.  Buffering (and
the merge's implicit slack) shifts each delay histogram toward zero;
the shifted histogram then yields the expected population of each basic
window, and the ratio of expected produced to expected true results is
the recall estimate.  A productivity profile, when supplied, corrects
the estimate for predicates whose match rate is delay-dependent.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .profiler import ProductivityMaps
from .stats import DelayHistogram


def clamp01(x: float) -> float:
    return 0.0 if x < 0.0 else (1.0 if x > 1.0 else x)


def shift_pdf(f: DelayHistogram, k_ms: int, ksync_ms: float = 0.0) -> DelayHistogram:
    """Delay histogram after absorbing k (+ implicit merge slack) of delay.

    Bins up to the absorbed amount collapse into bin 0; the rest slide
    down.  Granularity and sample count carry over; total mass is
    preserved exactly.
    """
    if k_ms < 0 or ksync_ms < 0:
        raise ValueError("slack must be non-negative")
    g = f.granularity
    shift = int((k_ms + ksync_ms) // g)
    if shift == 0:
        return f
    masses = f.masses
    head = math.fsum(masses[: shift + 1])
    tail = masses[shift + 1:]
    return DelayHistogram(g, (head,) + tail, f.sample_count)


def basic_window_cardinality(f_k: DelayHistogram, rate_per_sec: float,
                             window_ms: int, b_ms: int, l: int) -> float:
    """Expected tuple count of the l-th basic window (1-based, newest first).

    f_k is the post-buffering delay histogram.  Only tuples whose
    residual delay is small enough to have arrived before the window
    segment is probed are counted, so older segments (larger l) are more
    complete.  The last segment may be shorter when b does not divide
    the window extent evenly.
    """
    g = f_k.granularity
    if b_ms % g != 0:
        raise ValueError("basic window size must be a multiple of the granularity")
    if window_ms <= 0 or b_ms <= 0:
        raise ValueError("window and basic window extents must be positive")
    n = -(-window_ms // b_ms)
    if not 1 <= l <= n:
        raise ValueError(f"basic window index {l} out of range 1..{n}")
    extent = b_ms if l < n else window_ms - (n - 1) * b_ms
    limit = (l - 1) * b_ms // g
    reach = math.fsum(f_k.masses[: limit + 1])
    return rate_per_sec / 1000.0 * extent * reach


def expected_window_population(f_k: DelayHistogram, rate_per_sec: float,
                               window_ms: int, b_ms: int) -> float:
    """Sum of basic-window cardinalities over the whole window."""
    n = -(-window_ms // b_ms)
    return math.fsum(
        basic_window_cardinality(f_k, rate_per_sec, window_ms, b_ms, l)
        for l in range(1, n + 1)
    )


def true_size(rates_per_sec: tuple, windows_ms: tuple, span_ms: float,
              selectivity: float) -> float:
    """Expected true-result count over a time span (disorder-free join)."""
    m = len(rates_per_sec)
    rates_ms = [r / 1000.0 for r in rates_per_sec]
    rate_prod = math.prod(rates_ms)
    cross_section = math.fsum(
        math.prod(windows_ms[j] for j in range(m) if j != i) for i in range(m)
    )
    return selectivity * rate_prod * span_ms * cross_section


def prod_size(rates_per_sec: tuple, windows_ms: tuple, pdfs: tuple,
              ksync_ms: tuple, b_ms: int, k_ms: int, span_ms: float,
              selectivity: float) -> float:
    """Expected produced-result count over a time span at buffer slack k.

    Each stream triggers at its own rate; an in-order trigger (mass at
    residual delay zero) pairs with the other streams' expected window
    populations.
    """
    m = len(rates_per_sec)
    shifted = [shift_pdf(pdfs[i], k_ms, ksync_ms[i]) for i in range(m)]
    pops = [
        expected_window_population(shifted[i], rates_per_sec[i], windows_ms[i], b_ms)
        for i in range(m)
    ]
    rates_ms = [r / 1000.0 for r in rates_per_sec]
    total = math.fsum(
        rates_ms[i] * shifted[i].mass(0)
        * math.prod(pops[j] for j in range(m) if j != i)
        for i in range(m)
    )
    return selectivity * span_ms * total


@dataclass(frozen=True)
class ModelInputs:
    """Statistics bundle the recall estimate is computed from.

    selectivity is a finished-interval productivity snapshot, or None to
    treat the predicate's match rate as delay-independent.
    """

    rates_per_sec: tuple
    windows_ms: tuple
    pdfs: tuple
    ksync_ms: tuple
    g_ms: int
    b_ms: int
    selectivity: ProductivityMaps | None = None

    def __post_init__(self):
        m = len(self.rates_per_sec)
        if m < 2:
            raise ValueError("need at least two streams")
        if not (len(self.windows_ms) == len(self.pdfs) == len(self.ksync_ms) == m):
            raise ValueError("per-stream inputs must have equal length")
        if self.g_ms <= 0 or self.b_ms <= 0 or self.b_ms % self.g_ms != 0:
            raise ValueError("basic window size must be a positive multiple of g")
        if any(r <= 0 for r in self.rates_per_sec):
            raise ValueError("rates must be positive")
        if any(w <= 0 for w in self.windows_ms):
            raise ValueError("window extents must be positive")
        for f in self.pdfs:
            if f.granularity != self.g_ms:
                raise ValueError("histogram granularity disagrees with g")

    def selectivity_ratio(self, k_ms: int) -> tuple[float, bool]:
        if self.selectivity is None:
            return 1.0, True
        return self.selectivity.selectivity_ratio(k_ms)


def estimate_recall(inputs: ModelInputs, k_ms: int) -> float:
    """Predicted recall at uniform buffer slack k, clamped to [0, 1].

    The produced/true ratio cancels the shared rate, span and
    selectivity factors; only the in-order masses, the expected window
    populations, and (for delay-dependent predicates) the productivity
    correction remain.
    """
    m = len(inputs.rates_per_sec)
    shifted = [shift_pdf(inputs.pdfs[i], k_ms, inputs.ksync_ms[i]) for i in range(m)]
    pops = [
        expected_window_population(shifted[i], inputs.rates_per_sec[i],
                                   inputs.windows_ms[i], inputs.b_ms)
        for i in range(m)
    ]
    full = [inputs.rates_per_sec[i] / 1000.0 * inputs.windows_ms[i] for i in range(m)]
    num = math.fsum(
        shifted[i].mass(0) * math.prod(pops[j] for j in range(m) if j != i)
        for i in range(m)
    )
    den = math.fsum(
        math.prod(full[j] for j in range(m) if j != i) for i in range(m)
    )
    ratio, _ = inputs.selectivity_ratio(k_ms)
    return clamp01(ratio * num / den)


class RecallEvaluator:
    """Precomputed form of estimate_recall for repeated k lookups.

    An adaptation step walks k upward until the estimate clears its
    target, so the per-stream cumulative histograms and the denominator
    are computed once and each gamma(k) costs only a few lookups.
    """

    def __init__(self, inputs: ModelInputs):
        self.inputs = inputs
        self.m = len(inputs.rates_per_sec)
        self._cdfs = []
        for f in inputs.pdfs:
            acc = 0.0
            cdf = []
            for mass in f.masses:
                acc += mass
                cdf.append(acc)
            self._cdfs.append(cdf)
        self._den = math.fsum(
            math.prod(inputs.rates_per_sec[j] / 1000.0 * inputs.windows_ms[j]
                      for j in range(self.m) if j != i)
            for i in range(self.m)
        )
        b = inputs.b_ms
        self._segments = []
        for i in range(self.m):
            w = inputs.windows_ms[i]
            n = -(-w // b)
            segs = [(b if l < n else w - (n - 1) * b, (l - 1) * b // inputs.g_ms)
                    for l in range(1, n + 1)]
            self._segments.append(segs)

    def _cdf_at(self, i: int, idx: int) -> float:
        cdf = self._cdfs[i]
        return cdf[idx] if idx < len(cdf) else cdf[-1]

    def gamma(self, k_ms: int) -> float:
        g = self.inputs.g_ms
        f0 = []
        pops = []
        for i in range(self.m):
            shift = int((k_ms + self.inputs.ksync_ms[i]) // g)
            f0.append(self._cdf_at(i, shift))
            r_ms = self.inputs.rates_per_sec[i] / 1000.0
            pops.append(math.fsum(
                r_ms * extent * self._cdf_at(i, shift + limit)
                for extent, limit in self._segments[i]
            ))
        num = math.fsum(
            f0[i] * math.prod(pops[j] for j in range(self.m) if j != i)
            for i in range(self.m)
        )
        ratio, _ = self.inputs.selectivity_ratio(k_ms)
        return clamp01(ratio * num / self._den)


def equivalent_k(k_values: tuple, local_times: tuple):
    """Uniform slack equivalent to per-stream slacks at given local times.

    The merge delivers up to the slowest post-buffer frontier, so the
    uniform slack that preserves every stream's total (explicit plus
    implicit) slack is min(local times) minus the slowest frontier.
    """
    if len(k_values) != len(local_times) or not k_values:
        raise ValueError("need matching non-empty k and local-time vectors")
    return min(local_times) - min(t - k for t, k in zip(local_times, k_values))
