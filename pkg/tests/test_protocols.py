import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tadeval.core import SegmentSet, extract_segments
from tadeval.protocols import (
    DEFAULT_K_GRID,
    ProtocolConfig,
    adjust_pa,
    adjust_pa_percent_k,
    batch_counts,
    candidate_thresholds,
    evaluate,
    evaluate_counts,
    k_sweep,
    parse_protocol,
    required_detections,
    roc_pr,
    sweep_best_f1,
)

from conftest import random_instance

SEG = SegmentSet.from_bounds([(1, 4)], 5)
SCORES = [0.1, 0.2, 0.9, 0.3, 0.1]
LABELS = [0, 1, 1, 1, 0]


# -- reference implementations used as oracles --------------------------------


def oracle_metrics(scores, labels, delta, protocol, k=0.0):
    """Plain-Python thresholding, segment walk and counting."""
    pred = [1 if s > delta else 0 for s in scores]
    n = len(labels)
    adjusted = list(pred)
    t = 0
    while t < n:
        if labels[t] == 1:
            e = t
            while e < n and labels[e] == 1:
                e += 1
            hits = sum(pred[t:e])
            if protocol == "pa" and hits > 0:
                adjusted[t:e] = [1] * (e - t)
            if protocol == "pak" and hits / (e - t) > k / 100.0:
                adjusted[t:e] = [1] * (e - t)
            t = e
        else:
            t += 1
    tp = sum(1 for p, y in zip(adjusted, labels) if p and y)
    fp = sum(1 for p, y in zip(adjusted, labels) if p and not y)
    fn = sum(1 for p, y in zip(adjusted, labels) if not p and y)
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return tp, fp, fn, p, r, f


def brute_auroc(scores, labels):
    pos = [s for s, y in zip(scores, labels) if y]
    neg = [s for s, y in zip(scores, labels) if not y]
    total = 0.0
    for a, b in itertools.product(pos, neg):
        total += 1.0 if a > b else 0.5 if a == b else 0.0
    return total / (len(pos) * len(neg))


# -- adjustment ---------------------------------------------------------------


def test_adjust_pa_examples():
    assert adjust_pa([0, 0, 1, 0, 0], SEG).tolist() == [0, 1, 1, 1, 0]
    assert adjust_pa([0, 0, 0, 0, 0], SEG).tolist() == [0, 0, 0, 0, 0]
    assert adjust_pa([1, 0, 0, 0, 1], SEG).tolist() == [1, 0, 0, 0, 1]


def test_adjust_pa_percent_k_examples():
    assert adjust_pa_percent_k([0, 0, 1, 0, 0], SEG, 20).tolist() == [0, 1, 1, 1, 0]
    assert adjust_pa_percent_k([0, 0, 1, 0, 0], SEG, 40).tolist() == [0, 0, 1, 0, 0]


def test_adjust_out_of_range_segment():
    with pytest.raises(ValueError):
        adjust_pa([0, 1], SEG)
    with pytest.raises(ValueError):
        adjust_pa_percent_k([0, 1], SEG, 10)
    with pytest.raises(ValueError):
        adjust_pa_percent_k([0, 0, 1, 0, 0], SEG, 101)


@given(st.lists(st.integers(0, 1), min_size=1, max_size=80), st.data())
def test_k_zero_is_pa(labels, data):
    pred = data.draw(st.lists(st.integers(0, 1), min_size=len(labels), max_size=len(labels)))
    segs = extract_segments(labels)
    assert np.array_equal(adjust_pa_percent_k(pred, segs, 0), adjust_pa(pred, segs))
    assert np.array_equal(adjust_pa_percent_k(pred, segs, 100), np.asarray(pred))


@given(st.lists(st.integers(0, 1), min_size=1, max_size=80), st.data())
def test_adjustment_preserves_outside_predictions(labels, data):
    pred = np.asarray(data.draw(st.lists(st.integers(0, 1), min_size=len(labels), max_size=len(labels))))
    k = data.draw(st.floats(0, 100))
    segs = extract_segments(labels)
    outside = np.asarray(labels) == 0
    for adj in (adjust_pa(pred, segs), adjust_pa_percent_k(pred, segs, k)):
        assert np.array_equal(adj[outside], pred[outside])
        assert np.all(adj >= pred)


# -- evaluate -----------------------------------------------------------------


def test_evaluate_examples():
    assert evaluate(SCORES, LABELS, 0.5, ProtocolConfig.point()).f1 == pytest.approx(0.5)
    assert evaluate(SCORES, LABELS, 0.5, ProtocolConfig.pa()).f1 == 1.0
    assert evaluate(SCORES, LABELS, 0.5, ProtocolConfig.pa_k(50)).f1 == pytest.approx(0.5)


def test_evaluate_length_mismatch():
    with pytest.raises(ValueError):
        evaluate([0.1, 0.2], [0, 1, 1], 0.5)


def test_evaluate_matches_oracle(rng):
    for _ in range(200):
        s, y = random_instance(rng, int(rng.integers(1, 60)), decimals=2)
        delta = float(rng.choice(s)) if rng.random() < 0.5 else float(rng.random())
        k = float(rng.uniform(0, 100))
        for name, cfg in (("point", ProtocolConfig.point()), ("pa", ProtocolConfig.pa()), ("pak", ProtocolConfig.pa_k(k))):
            c = evaluate_counts(s, y, delta, cfg)
            m = evaluate(s, y, delta, cfg)
            tp, fp, fn, p, r, f = oracle_metrics(s.tolist(), y.tolist(), delta, name, k)
            assert (c.tp, c.fp, c.fn) == (tp, fp, fn)
            assert (m.precision, m.recall, m.f1) == pytest.approx((p, r, f), abs=1e-15)


@settings(max_examples=200)
@given(st.data())
def test_pa_dominance_property(data):
    n = data.draw(st.integers(1, 60))
    labels = data.draw(st.lists(st.integers(0, 1), min_size=n, max_size=n))
    scores = data.draw(st.lists(st.floats(0, 1), min_size=n, max_size=n))
    delta = data.draw(st.floats(0, 1))
    point = evaluate(scores, labels, delta, ProtocolConfig.point())
    pa = evaluate(scores, labels, delta, ProtocolConfig.pa())
    assert pa.f1 >= point.f1 and pa.precision >= point.precision and pa.recall >= point.recall
    fp = [evaluate_counts(scores, labels, delta, c).fp for c in (ProtocolConfig.point(), ProtocolConfig.pa(), ProtocolConfig.pa_k(30))]
    assert fp[0] == fp[1] == fp[2]


@settings(max_examples=100)
@given(st.data())
def test_f1_non_increasing_in_k(data):
    n = data.draw(st.integers(1, 60))
    labels = data.draw(st.lists(st.integers(0, 1), min_size=n, max_size=n))
    scores = data.draw(st.lists(st.floats(0, 1), min_size=n, max_size=n))
    delta = data.draw(st.floats(0, 1))
    f1 = [evaluate(scores, labels, delta, ProtocolConfig.pa_k(k)).f1 for k in DEFAULT_K_GRID]
    assert all(a >= b for a, b in zip(f1, f1[1:]))


def test_batch_counts_match_single(rng):
    s, y = random_instance(rng, 120)
    rows = rng.random((30, 120))
    for cfg in (ProtocolConfig.point(), ProtocolConfig.pa(), ProtocolConfig.pa_k(25)):
        tp, fp, fn = batch_counts(rows, y, 0.7, cfg)
        for i in range(rows.shape[0]):
            c = evaluate_counts(rows[i], y, 0.7, cfg)
            assert (tp[i], fp[i], fn[i]) == (c.tp, c.fp, c.fn)


def test_parse_protocol():
    assert parse_protocol("PA%K") is parse_protocol("pak")
    assert ProtocolConfig("pa").protocol is parse_protocol("pa")
    with pytest.raises(ValueError):
        parse_protocol("nope")
    with pytest.raises(ValueError):
        ProtocolConfig.pa_k(150)


# -- sweeps -------------------------------------------------------------------


def test_sweep_separable():
    res = sweep_best_f1([0.1, 0.9], [0, 1], ProtocolConfig.point())
    assert res.best_f1 == 1.0
    assert 0.1 <= res.best_threshold < 0.9
    assert np.all(np.diff(res.thresholds) > 0)
    assert res.best_f1 == res.f1.max()


def test_required_detections_matches_float_rule():
    for length in range(1, 120):
        for k in list(np.linspace(0, 100, 101)) + [33.333333333333336, 12.5, 0.1, 99.99]:
            need = required_detections(np.array([length]), k)[0]
            brute = next((c for c in range(length + 1) if c / length > k / 100.0), length + 1)
            assert need == brute, (length, k)


def test_sweep_matches_independent_oracle(rng):
    for _ in range(40):
        s, y = random_instance(rng, int(rng.integers(1, 50)), decimals=int(rng.integers(1, 3)))
        k = float(rng.choice([0, 10, 33.3, 50, 100]))
        for name, cfg in (("point", ProtocolConfig.point()), ("pa", ProtocolConfig.pa()), ("pak", ProtocolConfig.pa_k(k))):
            res = sweep_best_f1(s, y, cfg)
            for i, delta in enumerate(res.thresholds):
                tp, fp, fn, p, r, f = oracle_metrics(s.tolist(), y.tolist(), delta, name, k)
                assert (res.tp[i], res.fp[i], res.fn[i]) == (tp, fp, fn)
                assert res.f1[i] == pytest.approx(f, abs=1e-15)


def test_sweep_fast_equals_naive_bitwise(rng):
    for _ in range(60):
        s, y = random_instance(rng, 200, decimals=int(rng.integers(1, 4)))
        for cfg in (ProtocolConfig.point(), ProtocolConfig.pa(), ProtocolConfig.pa_k(float(rng.uniform(0, 100)))):
            a = sweep_best_f1(s, y, cfg, method="fast")
            b = sweep_best_f1(s, y, cfg, method="naive")
            for field in ("thresholds", "precision", "recall", "f1", "tp", "fp", "fn"):
                assert np.array_equal(getattr(a, field), getattr(b, field))
            assert a.best_index == b.best_index


def test_candidate_grids():
    s = np.array([0.3, 0.1, 0.3, 0.7])
    assert candidate_thresholds(s).tolist() == [-np.inf, 0.1, 0.3, 0.7]
    assert candidate_thresholds(s, [0.5, 0.2, 0.5]).tolist() == [0.2, 0.5]
    q = candidate_thresholds(np.arange(10000.0), 2000)
    assert q[0] == -np.inf and q.size == 2001
    with pytest.raises(ValueError):
        candidate_thresholds(s, [])
    with pytest.raises(ValueError):
        sweep_best_f1(s, [0, 1, 1, 0], candidates=[])


def test_sweep_long_segment_random_scores_pa():
    # one 1000-step segment, gamma = 0.05
    rng = np.random.default_rng(5)
    y = np.zeros(20000, dtype=np.int8)
    y[9000:10000] = 1
    res = sweep_best_f1(rng.random(20000), y, ProtocolConfig.pa())
    assert res.best_f1 >= 0.95


# -- K sweep ------------------------------------------------------------------


def test_k_sweep_endpoints(rng):
    s, y = random_instance(rng, 300)
    curve = k_sweep(s, y, 0.6)
    assert curve.k_values.tolist() == list(DEFAULT_K_GRID)
    assert curve.f1_values[0] == evaluate(s, y, 0.6, ProtocolConfig.pa()).f1
    assert curve.f1_values[-1] == evaluate(s, y, 0.6, ProtocolConfig.point()).f1
    assert np.all(np.diff(curve.f1_values) <= 0)


def test_k_sweep_best_threshold_endpoints(rng):
    s, y = random_instance(rng, 300)
    curve = k_sweep(s, y, None)
    assert curve.f1_values[0] == sweep_best_f1(s, y, ProtocolConfig.pa()).best_f1
    assert curve.f1_values[-1] == sweep_best_f1(s, y, ProtocolConfig.point()).best_f1


def test_k_sweep_perfect_predictions():
    y = np.array([0, 1, 1, 0, 0, 1, 1, 1, 0])
    curve = k_sweep(y.astype(float), y, 0.5)
    assert np.all(curve.f1_values == 1.0)
    assert curve.auc == pytest.approx(1.0)


def test_k_sweep_random_scores_decrease_on_long_segments():
    rng = np.random.default_rng(11)
    y = np.zeros(20000, dtype=np.int8)
    for start in (2000, 8000, 15000):
        y[start:start + 600] = 1
    curve = k_sweep(rng.random(y.size), y, None)
    assert curve.f1_values[0] > 0.8
    assert curve.f1_values[-1] < 0.3
    assert np.all(np.diff(curve.f1_values) <= 0)


def test_k_sweep_rejects_bad_grid():
    with pytest.raises(ValueError):
        k_sweep([0.1, 0.9], [0, 1], 0.5, [])
    with pytest.raises(ValueError):
        k_sweep([0.1, 0.9], [0, 1], 0.5, [50, 10])


# -- ROC / PR -----------------------------------------------------------------


@pytest.mark.parametrize("scores, expected", [([0.1, 0.9], 1.0), ([0.9, 0.1], 0.0), ([0.5, 0.5], 0.5)])
def test_auroc_examples(scores, expected):
    assert roc_pr(scores, [0, 1]).auroc == expected


def test_roc_curve_shape_and_bruteforce(rng):
    for _ in range(30):
        n = int(rng.integers(2, 500))
        s, y = random_instance(rng, n, decimals=int(rng.integers(1, 4)))
        y[0], y[-1] = 0, 1
        c = roc_pr(s, y)
        assert c.roc_points[0] == (0.0, 0.0) and c.roc_points[-1] == (1.0, 1.0)
        assert abs(c.auroc - brute_auroc(s.tolist(), y.tolist())) <= 1e-12
        assert 0.0 <= c.aupr <= 1.0


def test_aupr_matches_sklearn(rng):
    sklearn_metrics = pytest.importorskip("sklearn.metrics")
    for _ in range(20):
        s, y = random_instance(rng, 300, decimals=2)
        y[0], y[-1] = 0, 1
        c = roc_pr(s, y)
        assert c.aupr == pytest.approx(sklearn_metrics.average_precision_score(y, s), abs=1e-12)
        assert c.auroc == pytest.approx(sklearn_metrics.roc_auc_score(y, s), abs=1e-12)


def test_roc_single_class_error():
    with pytest.raises(ValueError):
        roc_pr([0.1, 0.2], [1, 1])
