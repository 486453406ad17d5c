"""Point-adjustment protocols, threshold sweeps and threshold-free metrics.

Three labelling rules are supported:

* ``POINT``: plain thresholding, ``score > delta``.
* ``PA``: a ground-truth segment with at least one detection is marked
  entirely positive.
* ``PA_PERCENT_K``: a segment is filled only when the fraction of detected
  steps inside it is strictly greater than ``K / 100``.  Segments that do
  not qualify keep their raw point-wise predictions.

``K = 0`` reproduces PA and ``K = 100`` reproduces the point-wise rule.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .core import (
    ConfusionCounts,
    MetricsTriple,
    SegmentSet,
    as_labels,
    as_scores,
    check_lengths,
    confusion,
    extract_segments,
    prf1,
    prf1_arrays,
    segment_ids,
    threshold_predictions,
)

DEFAULT_K_GRID = tuple(float(k) for k in range(0, 101, 10))
DEFAULT_QUANTILES = 2000


class Protocol(enum.Enum):
    POINT = "point"
    PA = "pa"
    PA_PERCENT_K = "pak"


@dataclass(frozen=True)
class ProtocolConfig:
    protocol: Protocol = Protocol.POINT
    k_percent: float = 0.0

    def __post_init__(self):
        if not isinstance(self.protocol, Protocol):
            object.__setattr__(self, "protocol", parse_protocol(self.protocol))
        if not 0.0 <= self.k_percent <= 100.0:
            raise ValueError(f"k_percent must lie in [0, 100], got {self.k_percent}")

    @classmethod
    def point(cls):
        return cls(Protocol.POINT)

    @classmethod
    def pa(cls):
        return cls(Protocol.PA)

    @classmethod
    def pa_k(cls, k_percent: float):
        return cls(Protocol.PA_PERCENT_K, float(k_percent))


def parse_protocol(name) -> Protocol:
    if isinstance(name, Protocol):
        return name
    key = str(name).strip().lower().replace("%", "").replace("_", "").replace("-", "")
    aliases = {
        "point": Protocol.POINT,
        "pointwise": Protocol.POINT,
        "f1": Protocol.POINT,
        "pa": Protocol.PA,
        "pak": Protocol.PA_PERCENT_K,
        "papercentk": Protocol.PA_PERCENT_K,
    }
    try:
        return aliases[key]
    except KeyError:
        raise ValueError(f"unknown protocol {name!r}; expected point, pa or pak") from None


def _check_segments(n: int, segments: SegmentSet):
    if segments.total_length_T > n or any(seg.end > n for seg in segments):
        raise ValueError(
            f"segments extend past the prediction series (length {n})"
        )


def adjust_pa(pred, segments: SegmentSet) -> np.ndarray:
    """Fill every segment that contains at least one positive prediction."""
    out = as_labels(pred).copy()
    _check_segments(out.size, segments)
    for seg in segments:
        if out[seg.start:seg.end].any():
            out[seg.start:seg.end] = 1
    return out


def adjust_pa_percent_k(pred, segments: SegmentSet, k_percent: float) -> np.ndarray:
    """Fill a segment only if its detected fraction is strictly above ``k_percent``%."""
    if not 0.0 <= k_percent <= 100.0:
        raise ValueError(f"k_percent must lie in [0, 100], got {k_percent}")
    out = as_labels(pred).copy()
    _check_segments(out.size, segments)
    k = k_percent / 100.0
    for seg in segments:
        length = seg.end - seg.start
        detected = int(out[seg.start:seg.end].sum())
        if detected / length > k:
            out[seg.start:seg.end] = 1
    return out


def adjust(pred, segments: SegmentSet, config: ProtocolConfig) -> np.ndarray:
    if config.protocol is Protocol.POINT:
        return as_labels(pred).copy()
    if config.protocol is Protocol.PA:
        return adjust_pa(pred, segments)
    return adjust_pa_percent_k(pred, segments, config.k_percent)


def evaluate_counts(scores, labels, delta: float, config: ProtocolConfig) -> ConfusionCounts:
    s = as_scores(scores)
    y = as_labels(labels)
    check_lengths(s, y)
    pred = adjust(threshold_predictions(s, delta), extract_segments(y), config)
    return confusion(pred, y)


def evaluate(scores, labels, delta: float, config: ProtocolConfig | None = None) -> MetricsTriple:
    """Threshold, optionally adjust, then score.

    >>> evaluate([.1, .2, .9, .3, .1], [0, 1, 1, 1, 0], 0.5, ProtocolConfig.pa()).f1
    1.0
    """
    return prf1(evaluate_counts(scores, labels, delta, config or ProtocolConfig()))


def batch_counts(scores_2d, labels, delta: float, config: ProtocolConfig):
    """Confusion counts for many score rows against the same labels.

    Returns ``(tp, fp, fn)`` integer arrays, one entry per row.  Used by the
    Monte Carlo simulator, where thousands of trials share one layout.
    """
    s = np.asarray(scores_2d, dtype=np.float64)
    if s.ndim != 2:
        raise ValueError("scores_2d must be a 2-D array (rows x time)")
    y = as_labels(labels).astype(bool)
    if s.shape[1] != y.size:
        raise ValueError(f"length mismatch: {s.shape[1]} scores vs {y.size} labels")
    pred = s > delta
    fp = np.count_nonzero(pred[:, ~y], axis=1).astype(np.int64)
    n_pos = int(y.sum())
    segments = extract_segments(y)
    if segments.M == 0:
        tp = np.zeros(s.shape[0], dtype=np.int64)
        return tp, fp, tp.copy()
    lengths = segments.lengths
    # columns of anomalous steps, segment by segment
    in_seg = pred[:, y]
    offsets = np.concatenate(([0], np.cumsum(lengths)[:-1]))
    counts = np.add.reduceat(in_seg.astype(np.int64), offsets, axis=1)
    if config.protocol is Protocol.POINT:
        tp = counts.sum(axis=1)
    else:
        if config.protocol is Protocol.PA:
            fire = counts > 0
        else:
            fire = counts / lengths > config.k_percent / 100.0
        tp = np.where(fire, lengths, counts).sum(axis=1)
    return tp, fp, n_pos - tp


# --------------------------------------------------------------------------
# threshold sweeps
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepResult:
    thresholds: np.ndarray
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    tp: np.ndarray
    fp: np.ndarray
    fn: np.ndarray
    best_index: int
    config: ProtocolConfig

    @property
    def best_threshold(self) -> float:
        return float(self.thresholds[self.best_index])

    @property
    def best_f1(self) -> float:
        return float(self.f1[self.best_index])

    @property
    def best(self) -> MetricsTriple:
        return self.metrics(self.best_index)

    def metrics(self, i: int) -> MetricsTriple:
        return MetricsTriple(float(self.precision[i]), float(self.recall[i]), float(self.f1[i]))

    def __len__(self):
        return self.thresholds.size


def candidate_thresholds(scores, candidates="unique") -> np.ndarray:
    """Sorted, strictly increasing threshold grid.

    ``"unique"`` gives every distinct score plus a ``-inf`` sentinel (all
    positive); an integer ``n`` gives ``n`` evenly spaced quantiles of the
    scores plus the sentinel; anything else is treated as an explicit grid.
    """
    s = as_scores(scores)
    if isinstance(candidates, str):
        if candidates != "unique":
            raise ValueError(f"unknown candidate spec {candidates!r}")
        grid = np.concatenate(([-np.inf], np.unique(s)))
    elif np.isscalar(candidates) and float(candidates).is_integer():
        n = int(candidates)
        if n < 1:
            raise ValueError("quantile count must be positive")
        qs = np.quantile(s, np.linspace(0.0, 1.0, n))
        grid = np.unique(np.concatenate(([-np.inf], qs)))
    else:
        grid = np.unique(np.asarray(candidates, dtype=np.float64))
        if np.isnan(grid).any():
            raise ValueError("threshold grid contains NaN")
    if grid.size == 0:
        raise ValueError("empty candidate threshold set")
    return grid


def _count_above(sorted_values: np.ndarray, thresholds: np.ndarray) -> np.ndarray:
    return sorted_values.size - np.searchsorted(sorted_values, thresholds, side="right")


def required_detections(lengths: np.ndarray, k_percent: float) -> np.ndarray:
    """Smallest in-segment detection count that satisfies ``count/len > K/100``.

    Evaluated with the same floating-point expression as
    :func:`adjust_pa_percent_k`; ``len + 1`` marks an unsatisfiable segment.
    """
    lengths = np.asarray(lengths, dtype=np.int64)
    k = k_percent / 100.0
    base = np.maximum(np.floor(k_percent * lengths / 100.0).astype(np.int64) - 1, 0)
    need = lengths + 1
    for d in range(3, -1, -1):
        c = base + d
        ok = (c <= lengths) & (c / lengths > k)
        need = np.where(ok, c, need)
    return need


def segment_fire_levels(scores, segments: SegmentSet, config: ProtocolConfig) -> np.ndarray:
    """Per-segment score level above which the segment gets filled.

    A segment is adjusted at threshold ``delta`` iff its level is ``> delta``.
    For PA this is the segment maximum; for PA%K it is the ``c``-th largest
    in-segment score with ``c`` from :func:`required_detections`.
    Unsatisfiable segments get ``-inf``.
    """
    s = as_scores(scores)
    lengths = segments.lengths
    if config.protocol is Protocol.PA:
        need = np.ones_like(lengths)
    else:
        need = required_detections(lengths, config.k_percent)
    levels = np.full(lengths.size, -np.inf)
    for m, seg in enumerate(segments):
        c = need[m]
        if c <= lengths[m]:
            block = s[seg.start:seg.end]
            # c-th largest == (len - c)-th smallest
            levels[m] = np.partition(block, lengths[m] - c)[lengths[m] - c]
    return levels


def _sweep_counts_fast(s, y, thresholds, config):
    anomalous = y.astype(bool)
    n_pos = int(anomalous.sum())
    fp = _count_above(np.sort(s[~anomalous]), thresholds)
    point_tp = _count_above(np.sort(s[anomalous]), thresholds)
    if config.protocol is Protocol.POINT or n_pos == 0:
        tp = point_tp
    else:
        segments = extract_segments(y)
        levels = segment_fire_levels(s, segments, config)
        order = np.argsort(levels, kind="stable")
        sorted_levels = levels[order]
        suffix_len = np.concatenate((np.cumsum(segments.lengths[order][::-1])[::-1], [0]))
        filled_len = suffix_len[np.searchsorted(sorted_levels, thresholds, side="right")]
        # raw detections that sit inside filled segments, already in point_tp
        ids = segment_ids(segments)[anomalous]
        capped = np.minimum(s[anomalous], levels[ids])
        double_counted = _count_above(np.sort(capped), thresholds)
        tp = point_tp + filled_len - double_counted
    tp = tp.astype(np.int64)
    fp = fp.astype(np.int64)
    return tp, fp, n_pos - tp


def _sweep_counts_naive(s, y, thresholds, config):
    segments = extract_segments(y)
    tp = np.empty(thresholds.size, dtype=np.int64)
    fp = np.empty_like(tp)
    fn = np.empty_like(tp)
    for i, delta in enumerate(thresholds):
        c = confusion(adjust(threshold_predictions(s, delta), segments, config), y)
        tp[i], fp[i], fn[i] = c.tp, c.fp, c.fn
    return tp, fp, fn


def sweep_best_f1(
    scores,
    labels,
    config: ProtocolConfig | None = None,
    candidates="unique",
    method: str = "fast",
) -> SweepResult:
    """Evaluate every candidate threshold and report the best F1.

    ``method="fast"`` sorts scores once and derives all confusion counts with
    binary searches, O((T + sum of segment lengths) log T).  ``method="naive"``
    re-thresholds and re-adjusts for each candidate; it exists as a reference
    and yields bit-identical output.
    """
    config = config or ProtocolConfig()
    s = as_scores(scores)
    y = as_labels(labels)
    check_lengths(s, y)
    thresholds = candidate_thresholds(s, candidates)
    if method == "fast":
        tp, fp, fn = _sweep_counts_fast(s, y, thresholds, config)
    elif method == "naive":
        tp, fp, fn = _sweep_counts_naive(s, y, thresholds, config)
    else:
        raise ValueError(f"unknown sweep method {method!r}")
    precision, recall, f1 = prf1_arrays(tp, fp, fn)
    return SweepResult(
        thresholds=thresholds,
        precision=precision,
        recall=recall,
        f1=f1,
        tp=tp,
        fp=fp,
        fn=fn,
        best_index=int(np.argmax(f1)),
        config=config,
    )


# --------------------------------------------------------------------------
# K sweep
# --------------------------------------------------------------------------


def trapezoid(y, x) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size < 2:
        return 0.0
    return float(np.sum(np.diff(x) * (y[1:] + y[:-1]) / 2.0))


@dataclass(frozen=True)
class KSweepCurve:
    k_values: np.ndarray
    f1_values: np.ndarray
    auc: float
    thresholds: np.ndarray


def k_sweep(scores, labels, delta: float | None, k_grid=DEFAULT_K_GRID, candidates="unique") -> KSweepCurve:
    """F1 under PA%K for each K, and the area under that curve on K/100.

    With ``delta=None`` every K uses its own best threshold (as when
    comparing against best-F1 tables); otherwise one fixed threshold is used.
    """
    ks = np.asarray(k_grid, dtype=np.float64)
    if ks.size == 0:
        raise ValueError("empty K grid")
    if ks.ndim != 1 or np.any(ks < 0) or np.any(ks > 100) or np.any(np.diff(ks) < 0):
        raise ValueError("K grid must be sorted values within [0, 100]")
    f1 = np.empty(ks.size)
    used = np.empty(ks.size)
    for i, k in enumerate(ks):
        config = ProtocolConfig.pa_k(k)
        if delta is None:
            res = sweep_best_f1(scores, labels, config, candidates)
            f1[i], used[i] = res.best_f1, res.best_threshold
        else:
            f1[i], used[i] = evaluate(scores, labels, delta, config).f1, delta
    return KSweepCurve(k_values=ks, f1_values=f1, auc=trapezoid(f1, ks / 100.0), thresholds=used)


# --------------------------------------------------------------------------
# ROC / PR
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RocPrCurves:
    fpr: np.ndarray
    tpr: np.ndarray
    recall: np.ndarray
    precision: np.ndarray
    thresholds: np.ndarray
    auroc: float
    aupr: float

    @property
    def roc_points(self):
        return list(zip(self.fpr.tolist(), self.tpr.tolist()))

    @property
    def pr_points(self):
        return list(zip(self.recall.tolist(), self.precision.tolist()))


def roc_pr(scores, labels) -> RocPrCurves:
    """ROC and precision-recall curves over all distinct score thresholds.

    AUROC uses the trapezoidal rule, which gives tied positive/negative pairs
    half credit.  AUPR is the step-wise average precision
    ``sum_i (R_i - R_{i-1}) P_i``.
    """
    s = as_scores(scores)
    y = as_labels(labels)
    check_lengths(s, y)
    n_pos = int(y.sum())
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("ROC/PR need both positive and negative labels")
    order = np.argsort(-s, kind="mergesort")
    s_sorted = s[order]
    y_sorted = y[order].astype(np.int64)
    last = np.flatnonzero(np.diff(s_sorted) != 0)
    last = np.concatenate((last, [s.size - 1]))
    tps = np.cumsum(y_sorted)[last]
    fps = (last + 1) - tps
    tps0 = np.concatenate(([0], tps))
    fps0 = np.concatenate(([0], fps))
    # integer numerator keeps the trapezoid exact up to one division
    auroc = float(np.sum(np.diff(fps0) * (tps0[1:] + tps0[:-1]))) / (2.0 * n_pos * n_neg)
    precision = tps / (tps + fps)
    recall = tps / n_pos
    aupr = float(np.sum(np.diff(np.concatenate(([0.0], recall))) * precision))
    return RocPrCurves(
        fpr=fps0 / n_neg,
        tpr=tps0 / n_pos,
        recall=recall,
        precision=precision,
        thresholds=s_sorted[last],
        auroc=auroc,
        aupr=aupr,
    )
