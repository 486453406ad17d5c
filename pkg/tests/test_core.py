import numpy as np
import pytest
from hypothesis import given, strategies as st

from tadeval.core import (
    ConfusionCounts,
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


def bounds(segset):
    return [(s.start, s.end) for s in segset]


@pytest.mark.parametrize(
    "labels, expected",
    [
        ([0, 1, 1, 1, 0], [(1, 4)]),
        ([0, 0, 0], []),
        ([1, 0, 1, 1], [(0, 1), (2, 4)]),
        ([1, 1, 1], [(0, 3)]),
    ],
)
def test_extract_segments(labels, expected):
    segs = extract_segments(labels)
    assert bounds(segs) == expected
    assert segs.total_length_T == len(labels)


def test_extract_rejects_non_binary():
    with pytest.raises(ValueError):
        extract_segments([0, 2, 1])


def test_segment_set_rejects_adjacent_and_overlapping():
    with pytest.raises(ValueError):
        SegmentSet.from_bounds([(0, 2), (2, 4)], 5)
    with pytest.raises(ValueError):
        SegmentSet.from_bounds([(0, 3), (2, 4)], 5)
    with pytest.raises(ValueError):
        SegmentSet.from_bounds([(0, 6)], 5)
    with pytest.raises(ValueError):
        Segment(3, 3)


@given(st.lists(st.integers(0, 1), min_size=1, max_size=200))
def test_paint_extract_roundtrip(labels):
    segs = extract_segments(labels)
    assert np.array_equal(paint_segments(segs), np.asarray(labels))
    assert extract_segments(paint_segments(segs)) == segs
    assert segs.lengths.sum() == sum(labels)


def test_dataset_stats():
    st_ = dataset_stats([0, 1, 1, 1, 0, 0, 0, 0, 0, 0])
    assert st_.anomaly_ratio_gamma == pytest.approx(0.3)
    assert st_.segment_count == 1
    assert st_.segment_lengths == [3]
    assert st_.mean_segment_length == 3.0
    empty = dataset_stats([0, 0])
    assert empty.segment_count == 0 and empty.anomaly_ratio_gamma == 0.0


@pytest.mark.parametrize(
    "scores, delta, expected",
    [([0.1, 0.9], 0.5, [0, 1]), ([0.5], 0.5, [0]), ([2, 3, 1], 0, [1, 1, 1])],
)
def test_threshold_predictions(scores, delta, expected):
    assert threshold_predictions(scores, delta).tolist() == expected


def test_threshold_rejects_nan():
    with pytest.raises(ValueError):
        threshold_predictions([0.1], float("nan"))
    with pytest.raises(ValueError):
        threshold_predictions([float("inf")], 0.5)


@pytest.mark.parametrize(
    "pred, labels, expected",
    [
        ([0, 1, 1, 1, 0], [0, 1, 1, 1, 0], (3, 0, 0, 2)),
        ([0, 0, 1, 0, 0], [0, 1, 1, 1, 0], (1, 0, 2, 2)),
        ([1, 1], [0, 0], (0, 2, 0, 0)),
    ],
)
def test_confusion(pred, labels, expected):
    c = confusion(pred, labels)
    assert (c.tp, c.fp, c.fn, c.tn) == expected
    assert c.total == len(pred)


def test_confusion_length_mismatch():
    with pytest.raises(ValueError):
        confusion([0, 1], [0, 1, 1])


@pytest.mark.parametrize(
    "tp, fp, fn, expected",
    [(3, 0, 0, (1, 1, 1)), (1, 0, 2, (1, 1 / 3, 0.5)), (0, 0, 5, (0, 0, 0)), (0, 0, 0, (0, 0, 0))],
)
def test_prf1(tp, fp, fn, expected):
    m = prf1(ConfusionCounts(tp, fp, fn, 0))
    assert (m.precision, m.recall, m.f1) == pytest.approx(expected)


@given(st.integers(0, 1000), st.integers(0, 1000), st.integers(0, 1000))
def test_prf1_bounds_and_harmonic_mean(tp, fp, fn):
    m = prf1(ConfusionCounts(tp, fp, fn, 0))
    for v in (m.precision, m.recall, m.f1):
        assert 0.0 <= v <= 1.0
    if m.precision > 0 and m.recall > 0:
        assert min(m.precision, m.recall) - 1e-15 <= m.f1 <= max(m.precision, m.recall) + 1e-15


def test_timeseries_validation():
    ts = TimeSeries([[1.0, 2.0], [3.0, 4.0]], ("a", "b"))
    assert (ts.T, ts.N) == (2, 2)
    assert np.asarray(ts).shape == (2, 2)
    assert TimeSeries([1.0, 2.0]).N == 1
    with pytest.raises(ValueError):
        TimeSeries([[np.nan]])
    with pytest.raises(ValueError):
        TimeSeries([[1.0, 2.0]], ("a",))
