"""m-way sliding-window stream joins with quality-driven disorder handling.

Per-stream reordering buffers absorb out-of-timestamp-order arrivals,
an m-way merge hides inter-stream skew, and a sliding-window join
produces results; the buffers' slack is re-derived every adaptation
interval from live delay/rate/selectivity statistics so a user-set
recall target is met with as little added latency as possible.
"""
from .config import ExperimentConfig, load_config, parse_kv
from .core import (StreamClock, StreamTuple, TraceFormatError, WindowSpec,
                   iter_trace, read_trace, skew, write_trace)
from .datagen import (AttrSpec, StreamGenSpec, TraceGenSpec, generate_stream,
                      generate_trace, interleave, parse_genspec, zipf_ranks,
                      zipf_sample)
from .engine import JoinPipeline, PushOutcome
from .join import (BandPredicate, CrossPredicate, CustomPredicate,
                   EquiPredicate, JoinPredicate, JoinState, ProbeRecord,
                   ResultTuple, output_in_order_check, parse_predicate)
from .kslack import KSlackBuffer
from .manager import (AdaptationDecision, BufferSizeManager,
                      ResultSizeMonitor, derive_instant_requirement)
from .model import (ModelInputs, RecallEvaluator, basic_window_cardinality,
                    clamp01, equivalent_k, estimate_recall,
                    expected_window_population, prod_size, shift_pdf,
                    true_size)
from .oracle import (RecallSample, RecallSeries, TimestampedCounts,
                     TrueResultSet, compute_truth, compute_truth_counts,
                     mean_gamma, phi, recall_at)
from .profiler import ProductivityMaps
from .stats import (AdaptiveWindow, DelayHistogram, DelayStats, NoStatistics,
                    SkewMonitor, StatisticsManager, StatsSnapshot,
                    coarse_delay)
from .synchronizer import Synchronizer
from .harness import (RunResult, run_experiment, sweep, write_reports)

__version__ = "0.1.0"

__all__ = [
    "AdaptationDecision", "AdaptiveWindow", "AttrSpec", "BandPredicate",
    "BufferSizeManager", "CrossPredicate", "CustomPredicate",
    "DelayHistogram", "DelayStats", "EquiPredicate", "ExperimentConfig",
    "JoinPipeline", "JoinPredicate", "JoinState", "KSlackBuffer",
    "ModelInputs", "NoStatistics", "ProbeRecord", "ProductivityMaps",
    "PushOutcome", "RecallEvaluator", "RecallSample", "RecallSeries",
    "ResultSizeMonitor", "ResultTuple", "RunResult", "SkewMonitor",
    "StatisticsManager", "StatsSnapshot", "StreamClock", "StreamGenSpec",
    "StreamTuple", "Synchronizer", "TimestampedCounts", "TraceFormatError",
    "TraceGenSpec", "TrueResultSet", "WindowSpec", "basic_window_cardinality",
    "clamp01", "coarse_delay", "compute_truth", "compute_truth_counts",
    "derive_instant_requirement", "equivalent_k", "estimate_recall",
    "expected_window_population", "generate_stream", "generate_trace",
    "interleave", "iter_trace", "load_config", "mean_gamma",
    "output_in_order_check", "parse_genspec", "parse_kv", "parse_predicate",
    "phi", "prod_size", "read_trace", "recall_at", "run_experiment",
    "shift_pdf", "skew", "sweep", "true_size", "write_trace", "zipf_ranks",
    "zipf_sample",
]
