"""Quality-driven buffer sizing.

Once per adaptation interval the manager turns the latest statistics
into a slack decision: it derives the recall the *next* interval must
reach so the sliding measurement period stays on target (recent
intervals already produced what they produced), then walks candidate
slacks upward in granularity steps until the model clears that
requirement.  The search is bounded by the largest delay seen in the
current history window; when even that bound cannot reach the target,
the decision is capped there and flagged.
"""
from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass

from .model import ModelInputs, RecallEvaluator, clamp01
from .profiler import ProductivityMaps
from .stats import StatsSnapshot


class ResultSizeMonitor:
    """Ring of (produced, expected-true) counts covering the last P-L ms."""

    def __init__(self, period_ms: int, interval_ms: int):
        if period_ms % interval_ms != 0 or period_ms < interval_ms:
            raise ValueError("period must be a positive multiple of the interval")
        self.capacity = (period_ms - interval_ms) // interval_ms
        self._ring: deque[tuple[int, float]] = deque(maxlen=self.capacity)

    def record_interval(self, produced: int, true_estimate: float) -> None:
        self._ring.append((produced, true_estimate))

    @property
    def produced_past(self) -> int:
        return sum(p for p, _ in self._ring)

    @property
    def true_past(self) -> float:
        return sum(t for _, t in self._ring)


def derive_instant_requirement(gamma_target: float, produced_past: int,
                               true_past: float, true_next: float) -> float:
    """Recall required of the coming interval to keep the period on target.

    With no results expected next interval the period-level target is
    returned unchanged; otherwise the requirement is solved from the
    period recall identity and clamped into [0, 1].
    """
    if true_next <= 0:
        return gamma_target
    need = (gamma_target * (true_past + true_next) - produced_past) / true_next
    return clamp01(need)


@dataclass(frozen=True)
class AdaptationDecision:
    """One adaptation step's outcome.

    elapsed_us is wall-clock and therefore not reproducible; everything
    else is a pure function of the run's logical state.
    """

    interval_end_ts: int
    k_star_ms: int
    gamma_target: float
    estimated_recall: float
    search_steps: int
    elapsed_us: float
    flags: tuple[str, ...] = ()


class BufferSizeManager:
    """Derives a uniform slack k* per interval from statistics snapshots."""

    def __init__(self, gamma: float, period_ms: int, interval_ms: int,
                 g_ms: int, b_ms: int, windows_ms: tuple,
                 strategy: str = "noneqsel"):
        if not 0.0 < gamma <= 1.0:
            raise ValueError("recall target must be in (0, 1]")
        if strategy not in ("eqsel", "noneqsel"):
            raise ValueError(f"unknown strategy {strategy!r}")
        self.gamma = gamma
        self.interval_ms = interval_ms
        self.g_ms = g_ms
        self.b_ms = b_ms
        self.windows_ms = tuple(windows_ms)
        self.strategy = strategy
        self.monitor = ResultSizeMonitor(period_ms, interval_ms)

    def adapt(self, interval_end_ts: int, snapshot: StatsSnapshot,
              interval_maps: ProductivityMaps,
              produced_in_interval: int) -> AdaptationDecision:
        """Compute the slack for the next interval.

        The finished interval's counts enter the monitor first, so the
        requirement sees the full trailing P-L ms.  Missing statistics
        (cold start) fall back to zero slack, flagged.
        """
        t0 = time.perf_counter_ns()
        n_true_next = float(interval_maps.true_result_size_estimate())
        self.monitor.record_interval(produced_in_interval, n_true_next)
        gamma_req = derive_instant_requirement(
            self.gamma, self.monitor.produced_past, self.monitor.true_past,
            n_true_next)
        flags: list[str] = []
        if (snapshot.max_delay is None
                or any(p is None for p in snapshot.pdfs)
                or any(r is None for r in snapshot.rates)):
            flags.append("warmup")
            elapsed = (time.perf_counter_ns() - t0) / 1000.0
            return AdaptationDecision(interval_end_ts, 0, gamma_req,
                                      float("nan"), 0, elapsed, tuple(flags))
        inputs = ModelInputs(
            rates_per_sec=tuple(snapshot.rates),
            windows_ms=self.windows_ms,
            pdfs=tuple(snapshot.pdfs),
            ksync_ms=tuple(snapshot.ksync),
            g_ms=self.g_ms,
            b_ms=self.b_ms,
            selectivity=interval_maps if self.strategy == "noneqsel" else None,
        )
        evaluator = RecallEvaluator(inputs)
        max_d = snapshot.max_delay
        g = self.g_ms
        k = 0
        steps = 0
        found = False
        estimate = 0.0
        while k <= max_d:
            estimate = evaluator.gamma(k)
            steps += 1
            if estimate >= gamma_req:
                found = True
                break
            k += g
        if not found:
            k = -(-max_d // g) * g
            estimate = evaluator.gamma(k)
            steps += 1
            flags.append("capped")
        if self.strategy == "noneqsel" and not inputs.selectivity_ratio(k)[1]:
            flags.append("sel-undefined")
        elapsed = (time.perf_counter_ns() - t0) / 1000.0
        return AdaptationDecision(interval_end_ts, k, gamma_req, estimate,
                                  steps, elapsed, tuple(flags))
