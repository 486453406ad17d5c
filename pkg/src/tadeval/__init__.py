"""Evaluation toolkit for time-series anomaly detection."""
from .core import (
    ConfusionCounts,
    DatasetStats,
    MetricsTriple,
    Segment,
    SegmentSet,
    TimeSeries,
    confusion,
    dataset_stats,
    extract_segments,
    paint_segments,
    prf1,
    threshold_predictions,
)
from .protocols import (
    KSweepCurve,
    Protocol,
    ProtocolConfig,
    RocPrCurves,
    SweepResult,
    adjust_pa,
    adjust_pa_percent_k,
    evaluate,
    k_sweep,
    roc_pr,
    sweep_best_f1,
)

__version__ = "0.1.0"
