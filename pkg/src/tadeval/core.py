"""Basic containers, segment extraction and confusion-matrix metrics.

Label, score and prediction series are plain 1-D numpy arrays; the helpers
``as_labels`` / ``as_scores`` validate and coerce them. Multichannel input is
held in :class:`TimeSeries`, which also behaves like an array.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


@dataclass(frozen=True)
class TimeSeries:
    """A ``T x N`` real-valued signal with optional channel names."""

    values: np.ndarray
    channel_names: tuple[str, ...] | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
            raise ValueError(f"expected a non-empty T x N matrix, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("time series contains non-finite values")
        object.__setattr__(self, "values", values)
        if self.channel_names is not None:
            names = tuple(str(n) for n in self.channel_names)
            if len(names) != values.shape[1]:
                raise ValueError(
                    f"{len(names)} channel names given for {values.shape[1]} channels"
                )
            object.__setattr__(self, "channel_names", names)

    @property
    def T(self) -> int:
        return self.values.shape[0]

    @property
    def N(self) -> int:
        return self.values.shape[1]

    def __len__(self):
        return self.T

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.values
        return self.values.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, TimeSeries):
            return NotImplemented
        return self.channel_names == other.channel_names and np.array_equal(
            self.values, other.values
        )

    __hash__ = None


@dataclass(frozen=True, order=True)
class Segment:
    """Half-open index range ``[start, end)`` of one anomaly."""

    start: int
    end: int

    def __post_init__(self):
        if not 0 <= self.start < self.end:
            raise ValueError(f"invalid segment [{self.start}, {self.end})")

    def __len__(self):
        return self.end - self.start


@dataclass(frozen=True)
class SegmentSet:
    segments: tuple[Segment, ...]
    total_length_T: int

    def __post_init__(self):
        segs = tuple(self.segments)
        object.__setattr__(self, "segments", segs)
        prev_end = -1
        for seg in segs:
            if seg.end > self.total_length_T:
                raise ValueError(
                    f"segment [{seg.start}, {seg.end}) exceeds series length {self.total_length_T}"
                )
            # strict: adjacent runs must already be merged
            if seg.start <= prev_end:
                raise ValueError("segments must be sorted, disjoint and non-adjacent")
            prev_end = seg.end

    def __len__(self):
        return len(self.segments)

    def __iter__(self):
        return iter(self.segments)

    @property
    def M(self) -> int:
        return len(self.segments)

    @property
    def lengths(self) -> np.ndarray:
        return np.array([len(s) for s in self.segments], dtype=np.int64)

    @property
    def starts(self) -> np.ndarray:
        return np.array([s.start for s in self.segments], dtype=np.int64)

    @property
    def ends(self) -> np.ndarray:
        return np.array([s.end for s in self.segments], dtype=np.int64)

    @classmethod
    def from_bounds(cls, bounds: Iterable[tuple[int, int]], total_length_T: int) -> "SegmentSet":
        return cls(tuple(Segment(int(s), int(e)) for s, e in bounds), int(total_length_T))


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class MetricsTriple:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class DatasetStats:
    anomaly_ratio_gamma: float
    segment_count: int
    segment_lengths: list[int] = field(default_factory=list)
    mean_segment_length: float = 0.0


def as_labels(labels) -> np.ndarray:
    """Validate a binary label (or prediction) series and return it as int8."""
    arr = np.asarray(labels)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError(f"labels must be a non-empty 1-D sequence, got shape {arr.shape}")
    if arr.dtype == bool:
        return arr.astype(np.int8)
    if not np.all((arr == 0) | (arr == 1)):
        raise ValueError("labels must contain only 0 and 1")
    return arr.astype(np.int8)


def as_scores(scores) -> np.ndarray:
    arr = np.asarray(scores, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError(f"scores must be a non-empty 1-D sequence, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("scores contain non-finite values")
    return arr


def extract_segments(labels) -> SegmentSet:
    """Maximal runs of 1s as half-open segments.

    >>> extract_segments([1, 0, 1, 1]).segments
    (Segment(start=0, end=1), Segment(start=2, end=4))
    """
    y = as_labels(labels)
    padded = np.concatenate(([0], y, [0])).astype(np.int8)
    edges = np.diff(padded)
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1)
    return SegmentSet.from_bounds(zip(starts.tolist(), ends.tolist()), y.size)


def paint_segments(segments: SegmentSet) -> np.ndarray:
    """Inverse of :func:`extract_segments`: a 0/1 series with the segments set."""
    y = np.zeros(segments.total_length_T, dtype=np.int8)
    for seg in segments:
        y[seg.start:seg.end] = 1
    return y


def dataset_stats(labels) -> DatasetStats:
    y = as_labels(labels)
    segs = extract_segments(y)
    lengths = segs.lengths.tolist()
    return DatasetStats(
        anomaly_ratio_gamma=float(sum(lengths)) / y.size,
        segment_count=len(lengths),
        segment_lengths=lengths,
        mean_segment_length=float(np.mean(lengths)) if lengths else 0.0,
    )


def threshold_predictions(scores, delta: float) -> np.ndarray:
    """1 where the score is strictly above ``delta``; ties are negatives."""
    if not np.isfinite(delta) and delta != -np.inf:
        raise ValueError(f"threshold must be finite, got {delta}")
    return (as_scores(scores) > delta).astype(np.int8)


def confusion(pred, labels) -> ConfusionCounts:
    p = as_labels(pred).astype(bool)
    y = as_labels(labels).astype(bool)
    if p.size != y.size:
        raise ValueError(f"length mismatch: {p.size} predictions vs {y.size} labels")
    tp = int(np.count_nonzero(p & y))
    fp = int(np.count_nonzero(p & ~y))
    fn = int(np.count_nonzero(~p & y))
    return ConfusionCounts(tp=tp, fp=fp, fn=fn, tn=p.size - tp - fp - fn)


def prf1_arrays(tp, fp, fn) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised precision/recall/F1 with every 0/0 mapped to 0.

    All scalar and swept metrics go through this one routine so that
    different counting strategies yield bit-identical floats.
    """
    tp = np.asarray(tp, dtype=np.float64)
    fp = np.asarray(fp, dtype=np.float64)
    fn = np.asarray(fn, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        pden = tp + fp
        rden = tp + fn
        precision = np.where(pden > 0, tp / pden, 0.0)
        recall = np.where(rden > 0, tp / rden, 0.0)
        s = precision + recall
        f1 = np.where(s > 0, 2.0 * precision * recall / s, 0.0)
    return precision, recall, f1


def prf1(counts: ConfusionCounts) -> MetricsTriple:
    p, r, f = prf1_arrays(counts.tp, counts.fp, counts.fn)
    return MetricsTriple(float(p), float(r), float(f))


def segment_ids(segments: SegmentSet) -> np.ndarray:
    """Per-time-step index of the containing segment, -1 outside segments."""
    ids = np.full(segments.total_length_T, -1, dtype=np.int64)
    for m, seg in enumerate(segments):
        ids[seg.start:seg.end] = m
    return ids


def check_lengths(*arrays: Sequence) -> int:
    n = {len(a) for a in arrays}
    if len(n) != 1:
        raise ValueError(f"length mismatch: {sorted(n)}")
    return n.pop()
