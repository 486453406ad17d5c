"""Closed-form PA metrics for uniform random scores, and a simulator to check them.

For a single anomaly segment of length ``L`` in a series with anomaly ratio
``gamma``, scores ``~ U(0, 1)`` and threshold ``d``:

    recall    = 1 - d**L
    precision = gamma * recall / (gamma * recall + (1 - gamma) * (1 - d))

The precision follows from Bayes' rule with ``Pr(y_hat=1, y=1) = gamma * R``.
A variant with denominator ``(gamma - d**L) + (1 - gamma) * (1 - d)`` is kept
behind ``form="printed"`` for comparison; it can go negative and does not
match simulation.

For several segments the per-segment detection events are independent, so
expected recall is the length-weighted mean of ``1 - d**L_m``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import SegmentSet, paint_segments
from .protocols import ProtocolConfig, batch_counts


@dataclass(frozen=True)
class AnalyticParams:
    gamma: float
    segment_length_L: int
    delta_prime: float

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.segment_length_L < 1:
            raise ValueError("segment length must be >= 1")
        if not 0.0 <= self.delta_prime <= 1.0:
            raise ValueError(f"delta_prime must lie in [0, 1], got {self.delta_prime}")


@dataclass(frozen=True)
class SegmentLayout:
    segments: SegmentSet

    @property
    def total_length_T(self) -> int:
        return self.segments.total_length_T

    @property
    def lengths(self) -> np.ndarray:
        return self.segments.lengths

    @property
    def gamma(self) -> float:
        return float(self.lengths.sum()) / self.total_length_T

    def labels(self) -> np.ndarray:
        return paint_segments(self.segments)

    @classmethod
    def single(cls, gamma: float, L: int) -> "SegmentLayout":
        """One segment of length ``L`` in a series of length ``round(L / gamma)``."""
        T = int(round(L / gamma))
        if T <= L:
            raise ValueError(f"gamma={gamma} and L={L} leave no normal steps")
        start = (T - L) // 2
        return cls(SegmentSet.from_bounds([(start, start + L)], T))

    @classmethod
    def from_lengths(cls, lengths, T: int, gap: int | None = None) -> "SegmentLayout":
        """Segments laid out left to right with equal normal gaps between them."""
        lengths = [int(n) for n in lengths]
        free = T - sum(lengths)
        if gap is None:
            gap = free // (len(lengths) + 1)
        if gap < 1 or free < gap * (len(lengths) + 1):
            raise ValueError("segments do not fit")
        bounds, pos = [], gap
        for n in lengths:
            bounds.append((pos, pos + n))
            pos += n + gap
        return cls(SegmentSet.from_bounds(bounds, T))


def expected_recall_pa(params: AnalyticParams) -> float:
    return 1.0 - params.delta_prime ** params.segment_length_L


def expected_precision_pa(params: AnalyticParams, form: str = "bayes") -> float:
    """Expected PA precision; 0 when nothing can be predicted positive (``d = 1``)."""
    g, d, L = params.gamma, params.delta_prime, params.segment_length_L
    recall = expected_recall_pa(params)
    fp_mass = (1.0 - g) * (1.0 - d)
    if form == "bayes":
        denom = g * recall + fp_mass
    elif form == "printed":
        denom = (g - d ** L) + fp_mass
    else:
        raise ValueError(f"unknown precision form {form!r}")
    if d == 1.0 or denom == 0.0:
        return 0.0
    return g * recall / denom


def expected_f1_pa(params: AnalyticParams) -> float:
    p = expected_precision_pa(params)
    r = expected_recall_pa(params)
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


def expected_recall_layout(lengths, delta_prime: float) -> float:
    lengths = np.asarray(lengths, dtype=np.float64)
    return float(np.sum(lengths * (1.0 - delta_prime ** lengths)) / lengths.sum())


def expected_precision_layout(layout: SegmentLayout, delta_prime: float) -> float:
    lengths = layout.lengths.astype(np.float64)
    tp = np.sum(lengths * (1.0 - delta_prime ** lengths))
    fp = (layout.total_length_T - lengths.sum()) * (1.0 - delta_prime)
    return float(tp / (tp + fp)) if tp + fp > 0 else 0.0


@dataclass(frozen=True)
class F1Curve:
    deltas: np.ndarray
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray

    @property
    def best_index(self) -> int:
        return int(np.argmax(self.f1))

    @property
    def max_f1(self) -> float:
        return float(self.f1[self.best_index])

    @property
    def best_delta(self) -> float:
        return float(self.deltas[self.best_index])


def expected_f1_pa_curve(gamma: float, L: int, delta_grid=None, form: str = "bayes") -> F1Curve:
    """Expected F1 after PA along a threshold grid (F1 of the expected P and R)."""
    d = np.linspace(0.0, 1.0, 10_001) if delta_grid is None else np.asarray(delta_grid, dtype=np.float64)
    if d.size == 0:
        raise ValueError("empty threshold grid")
    if np.any(d < 0) or np.any(d > 1):
        raise ValueError("threshold grid must lie within [0, 1]")
    p = np.array([expected_precision_pa(AnalyticParams(gamma, L, float(x)), form) for x in d])
    r = 1.0 - d ** L
    s = p + r
    with np.errstate(invalid="ignore", divide="ignore"):
        f1 = np.where(s > 0, 2 * p * r / s, 0.0)
    return F1Curve(d, p, r, f1)


# --------------------------------------------------------------------------
# Monte Carlo
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class MonteCarloReport:
    """Simulated PA metrics.

    ``mean_*`` average the per-trial metrics.  ``pooled_*`` are ratio
    estimators over summed counts (e.g. ``sum TP / sum (TP + FP)``), which
    estimate the same quantity as the closed forms; their standard errors use
    the delta method.
    """

    trials: int
    mean_precision: float
    mean_recall: float
    mean_f1_pa: float
    stderr_precision: float
    stderr_recall: float
    stderr_f1_pa: float
    pooled_precision: float
    pooled_recall: float
    pooled_f1: float
    stderr_pooled_precision: float
    stderr_pooled_recall: float
    stderr_pooled_f1: float


def _ratio_estimate(a: np.ndarray, b: np.ndarray) -> tuple[float, float]:
    n = a.size
    bsum = b.sum()
    if bsum == 0:
        return 0.0, 0.0
    ratio = a.sum() / bsum
    if n < 2:
        return float(ratio), 0.0
    resid = a - ratio * b
    se = math.sqrt(np.var(resid, ddof=1) / n) / (bsum / n)
    return float(ratio), float(se)


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    se = float(np.std(x, ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0
    return float(x.mean()), se


def monte_carlo_pa(
    layout: SegmentLayout,
    delta_prime: float,
    trials: int = 10_000,
    seed: int = 0,
    protocol: ProtocolConfig | None = None,
    n_jobs: int = 1,
    max_chunk_cells: int = 2_000_000,
) -> MonteCarloReport:
    """Draw ``U(0, 1)`` scores over ``layout`` and score them at ``delta_prime``.

    Trials are processed in chunks whose size depends only on the layout;
    each chunk has its own child seed, so results do not depend on
    ``n_jobs``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    protocol = protocol or ProtocolConfig.pa()
    labels = layout.labels()
    T = labels.size
    rows = max(1, min(trials, max_chunk_cells // T))
    sizes = [min(rows, trials - lo) for lo in range(0, trials, rows)]
    children = np.random.SeedSequence(seed).spawn(len(sizes))

    def run(i):
        rng = np.random.default_rng(children[i])
        return batch_counts(rng.random((sizes[i], T)), labels, delta_prime, protocol)

    if n_jobs > 1:
        with ThreadPoolExecutor(n_jobs) as pool:
            parts = list(pool.map(run, range(len(sizes))))
    else:
        parts = [run(i) for i in range(len(sizes))]
    tp = np.concatenate([p[0] for p in parts]).astype(np.float64)
    fp = np.concatenate([p[1] for p in parts]).astype(np.float64)
    fn = np.concatenate([p[2] for p in parts]).astype(np.float64)

    with np.errstate(invalid="ignore", divide="ignore"):
        prec = np.where(tp + fp > 0, tp / (tp + fp), 0.0)
        rec = np.where(tp + fn > 0, tp / (tp + fn), 0.0)
        f1 = np.where(prec + rec > 0, 2 * prec * rec / (prec + rec), 0.0)
    mp, sp = _mean_se(prec)
    mr, sr = _mean_se(rec)
    mf, sf = _mean_se(f1)
    pp, spp = _ratio_estimate(tp, tp + fp)
    pr, spr = _ratio_estimate(tp, tp + fn)
    pf, spf = _ratio_estimate(2 * tp, 2 * tp + fp + fn)
    return MonteCarloReport(
        trials=trials,
        mean_precision=mp,
        mean_recall=mr,
        mean_f1_pa=mf,
        stderr_precision=sp,
        stderr_recall=sr,
        stderr_f1_pa=sf,
        pooled_precision=pp,
        pooled_recall=pr,
        pooled_f1=pf,
        stderr_pooled_precision=spp,
        stderr_pooled_recall=spr,
        stderr_pooled_f1=spf,
    )
