"""Experiment driver.

Runs one trace through the pipeline in one of three modes:

  quality  slack adapted each interval from live statistics
  none     slack pinned to zero
  max      slack tracks the running maximum observed delay

Recall is sampled at every adaptation tick in all modes, so
requirement-fulfillment numbers are comparable across modes.  Each
sample's window is fixed during the run (the tick time and the slack
then in force), but the fraction itself is computed after the run from
the complete produced output: a result counts for every window its
timestamp falls in, whether it was emitted before or after the tick.
Measuring online instead would charge a buffered-but-coming result as
missing and so penalize exactly the configurations that buffer most.

All measurement is count-based: the engine's results are a subset of
the truth, are never emitted twice, and carry the truth-side timestamp,
so per-window counting equals identity matching.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field, replace

from .config import ExperimentConfig
from .core import WindowSpec, read_trace
from .datagen import generate_trace, parse_genspec
from .engine import JoinPipeline
from .manager import AdaptationDecision, BufferSizeManager
from .oracle import (RecallSample, RecallSeries, TimestampedCounts,
                     compute_truth_counts, mean_gamma, phi)
from .profiler import ProductivityMaps
from .stats import StatisticsManager


@dataclass
class RunResult:
    config: ExperimentConfig
    decisions: list[AdaptationDecision]
    series: RecallSeries
    summary: dict
    counters: dict
    k_log: list[tuple[int, int]] = field(default_factory=list)


def load_trace(config: ExperimentConfig) -> list:
    if config.trace_path:
        return read_trace(config.trace_path)
    with open(config.gen_spec_path, encoding="utf-8") as fh:
        spec = parse_genspec(fh.read())
    spec = replace(spec, seed=config.seed)
    return generate_trace(spec)


def _time_weighted_k(k_log: list[tuple[int, int]], end_ts: int) -> float:
    if not k_log:
        return 0.0
    if end_ts <= k_log[0][0]:
        return float(k_log[0][1])
    area = 0.0
    for (t0, k), (t1, _) in zip(k_log, k_log[1:]):
        area += k * (min(t1, end_ts) - t0)
    last_t, last_k = k_log[-1]
    if end_ts > last_t:
        area += last_k * (end_ts - last_t)
    return area / (end_ts - k_log[0][0])


def run_experiment(config: ExperimentConfig, trace=None,
                   truth_counts: TimestampedCounts | None = None) -> RunResult:
    """Run one experiment; trace and truth may be shared across runs."""
    config.validate()
    if trace is None:
        trace = load_trace(config)
    windows = WindowSpec(config.windows_ms)
    predicate = config.parsed_predicate()
    if truth_counts is None:
        truth_counts = compute_truth_counts(trace, windows, predicate)

    pipeline = JoinPipeline(windows, predicate, k=0, emit_results=False)
    quality = config.mode == "quality"
    stats = StatisticsManager(config.m, config.g_ms) if quality else None
    profiler = ProductivityMaps(config.g_ms) if quality else None
    manager = (BufferSizeManager(config.gamma, config.period_ms,
                                 config.interval_ms, config.g_ms, config.b_ms,
                                 config.windows_ms, config.strategy)
               if quality else None)

    produced = TimestampedCounts()
    decisions: list[AdaptationDecision] = []
    ticks: list[tuple[int, int]] = []
    start_ts: int | None = None
    k_log: list[tuple[int, int]] = []
    next_tick = 0
    emitted_since_tick = 0

    def absorb(outcome) -> None:
        nonlocal emitted_since_tick
        for rec in outcome.records:
            if rec.n_join:
                produced.add(rec.ts, rec.n_join)
                emitted_since_tick += rec.n_join
            if quality:
                profiler.record(rec)

    for e in trace:
        outcome = pipeline.push(e)
        if quality:
            stats.on_arrival(e.stream, outcome.delay,
                             pipeline.clocks[e.stream - 1].local_time,
                             pipeline.local_times(), pipeline.all_started())
        absorb(outcome)
        if start_ts is None:
            start_ts = e.ts
            next_tick = e.ts + config.interval_ms
            k_log.append((e.ts, pipeline.k))
        if config.mode == "max" and pipeline.max_delay_seen > pipeline.k:
            absorb(pipeline.set_k(pipeline.max_delay_seen))
            k_log.append((pipeline.global_time, pipeline.k))
        now = pipeline.global_time
        while now >= next_tick:
            boundary = next_tick
            ticks.append((boundary, pipeline.k))
            if quality:
                snapshot = stats.snapshot()
                maps = profiler.reset_interval()
                # the controller compares what came out of the join this
                # interval against the maps' estimate of what should have;
                # both counts are emission-side, so buffering lag cannot
                # starve the produced side and pin the requirement at 1
                decision = manager.adapt(boundary, snapshot, maps,
                                         emitted_since_tick)
                emitted_since_tick = 0
                decisions.append(decision)
                if decision.k_star_ms != pipeline.k:
                    absorb(pipeline.set_k(decision.k_star_ms))
                    k_log.append((boundary, pipeline.k))
            next_tick += config.interval_ms

    absorb(pipeline.finish())
    counters = pipeline.reconcile()

    series = RecallSeries(start_ts if start_ts is not None else 0,
                          config.period_ms)
    for boundary, k_then in ticks:
        true_in = truth_counts.count_in(boundary - config.period_ms, boundary)
        prod_in = produced.count_in(boundary - config.period_ms, boundary)
        gamma_p = 1.0 if true_in == 0 else prod_in / true_in
        series.add(RecallSample(boundary, gamma_p, k_then, prod_in, true_in))

    end_ts = pipeline.global_time
    summary = {
        "mode": config.mode,
        "gamma": config.gamma,
        "strategy": config.strategy,
        "predicate": config.predicate,
        "tuples": pipeline.pushed,
        "result_count": produced.total,
        "true_count": truth_counts.total,
        "samples": len(series.samples),
        "samples_measured": len(series.measured()),
        "avg_k_ms": _time_weighted_k(k_log, end_ts),
        "final_k_ms": pipeline.k,
        "max_delay_seen_ms": pipeline.max_delay_seen,
    }
    try:
        summary["mean_gamma_p"] = mean_gamma(series)
        summary["phi_gamma"] = phi(series, config.gamma)
        summary["phi_99gamma"] = phi(series, 0.99 * config.gamma)
    except ValueError:
        summary["mean_gamma_p"] = float("nan")
        summary["phi_gamma"] = float("nan")
        summary["phi_99gamma"] = float("nan")
    if decisions:
        times = [d.elapsed_us for d in decisions]
        summary["adapt_mean_us"] = sum(times) / len(times)
        summary["adapt_max_us"] = max(times)
        summary["adaptations"] = len(decisions)
    return RunResult(config, decisions, series, summary, counters, k_log)


# CSV cells: ints plain, floats via repr (shortest round-trip form), so
# identical runs serialize identically byte for byte.
def _cell(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return repr(v)
    return str(v)


DECISION_COLUMNS = ("interval_end_ts", "k_star_ms", "gamma_target",
                    "estimated_recall", "search_steps", "adapt_time_us",
                    "flags")
RECALL_COLUMNS = ("measurement_ts", "gamma_P", "k_current_ms",
                  "produced_in_P", "true_in_P")


def decisions_csv(decisions) -> str:
    """Decision log; the wall-time column is zeroed to keep runs comparable
    byte for byte (real timings live in the summary)."""
    lines = [",".join(DECISION_COLUMNS)]
    for d in decisions:
        lines.append(",".join((
            _cell(d.interval_end_ts), _cell(d.k_star_ms),
            _cell(d.gamma_target), _cell(d.estimated_recall),
            _cell(d.search_steps), "0", ";".join(d.flags))))
    return "\n".join(lines) + "\n"


def recall_csv(series: RecallSeries) -> str:
    lines = [",".join(RECALL_COLUMNS)]
    for s in series.samples:
        lines.append(",".join((
            _cell(s.ts), _cell(s.gamma), _cell(s.k_ms),
            _cell(s.produced_in_period), _cell(s.true_in_period))))
    return "\n".join(lines) + "\n"


def summary_text(result: RunResult) -> str:
    lines = [f"{key}: {_cell(value)}" for key, value in result.summary.items()]
    for name, count in result.counters.items():
        lines.append(f"tuples_{name}: {count}")
    return "\n".join(lines) + "\n"


def write_reports(result: RunResult, out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "decisions.csv"), "w", encoding="utf-8",
              newline="") as fh:
        fh.write(decisions_csv(result.decisions))
    with open(os.path.join(out_dir, "recall.csv"), "w", encoding="utf-8",
              newline="") as fh:
        fh.write(recall_csv(result.series))
    with open(os.path.join(out_dir, "summary.txt"), "w",
              encoding="utf-8") as fh:
        fh.write(summary_text(result))


SWEEPABLE = {"gamma": float, "period_ms": int, "interval_ms": int, "g_ms": int}


def sweep(config: ExperimentConfig, param: str, values) -> list[RunResult]:
    """Run the config once per value of one parameter, sharing the trace."""
    if param not in SWEEPABLE:
        raise ValueError(f"cannot sweep {param!r}; one of {sorted(SWEEPABLE)}")
    cast = SWEEPABLE[param]
    trace = load_trace(config)
    truth = compute_truth_counts(trace, WindowSpec(config.windows_ms),
                                 config.parsed_predicate())
    results = []
    for value in values:
        cfg = replace(config, **{param: cast(value)})
        results.append(run_experiment(cfg, trace=trace, truth_counts=truth))
    return results


def sweep_csv(param: str, results: list[RunResult]) -> str:
    columns = (param, "avg_k_ms", "mean_gamma_p", "phi_gamma", "phi_99gamma",
               "result_count")
    lines = [",".join(columns)]
    for r in results:
        lines.append(",".join((
            _cell(getattr(r.config, param)), _cell(r.summary["avg_k_ms"]),
            _cell(r.summary["mean_gamma_p"]), _cell(r.summary["phi_gamma"]),
            _cell(r.summary["phi_99gamma"]), _cell(r.summary["result_count"]))))
    return "\n".join(lines) + "\n"
