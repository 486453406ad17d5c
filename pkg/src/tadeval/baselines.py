"""Reference anomaly scores that any detector should beat.

* Case 1: i.i.d. ``U(0, 1)`` scores, independent of the input.
* Case 2: the norm of the normalised input window, i.e. reconstruction error
  against a model that always outputs zero.
* Case 3: reconstruction error of an LSTM encoder-decoder whose weights are
  drawn once from ``N(0, sigma^2)`` and never trained.

Window scores are ``||w - w_hat||_2 / tau`` unless ``score_form="mse"``
is requested, which gives the mean of squared errors instead.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .core import TimeSeries, as_labels, check_lengths
from .protocols import ProtocolConfig, sweep_best_f1

DEFAULT_TAU = 120
DEFAULT_SIGMA = math.sqrt(0.02)


class Alignment(enum.Enum):
    LAST = "last"
    FIRST = "first"


class NormMethod(enum.Enum):
    MINMAX = "minmax"
    ZSCORE = "zscore"
    NONE = "none"


class Case(enum.Enum):
    CASE1 = "case1"
    CASE2 = "case2"
    CASE3 = "case3"


@dataclass(frozen=True)
class WindowSpec:
    tau: int = DEFAULT_TAU
    alignment: Alignment = Alignment.LAST
    stride: int = 1

    def __post_init__(self):
        if self.tau < 1:
            raise ValueError(f"window length must be >= 1, got {self.tau}")
        if self.stride != 1:
            raise ValueError("only stride 1 is supported")
        object.__setattr__(self, "alignment", Alignment(self.alignment))


@dataclass(frozen=True)
class NormalizationSpec:
    method: NormMethod = NormMethod.MINMAX

    def __post_init__(self):
        object.__setattr__(self, "method", NormMethod(self.method))


@dataclass(frozen=True)
class RandomModelConfig:
    hidden_size: int = 64
    weight_sigma: float = DEFAULT_SIGMA
    seed: int = 0

    def __post_init__(self):
        if self.hidden_size < 1:
            raise ValueError("hidden_size must be positive")
        if not self.weight_sigma > 0:
            raise ValueError("weight_sigma must be > 0")


def _values(series) -> np.ndarray:
    if isinstance(series, TimeSeries):
        return series.values
    return TimeSeries(series).values


def make_windows(series, spec: WindowSpec | int) -> np.ndarray:
    """Stride-1 windows as a read-only ``(T - tau + 1, tau, N)`` view."""
    if isinstance(spec, int):
        spec = WindowSpec(spec)
    x = _values(series)
    if spec.tau > x.shape[0]:
        raise ValueError(f"window length {spec.tau} exceeds series length {x.shape[0]}")
    return sliding_window_view(x, spec.tau, axis=0).transpose(0, 2, 1)


def fit_normalizer(reference, spec: NormalizationSpec):
    """Per-channel ``(offset, scale)`` learned from the reference series."""
    ref = _values(reference)
    n = ref.shape[1]
    if spec.method is NormMethod.NONE:
        return np.zeros(n), np.ones(n)
    if spec.method is NormMethod.MINMAX:
        lo, hi = ref.min(axis=0), ref.max(axis=0)
        return lo, hi - lo
    return ref.mean(axis=0), ref.std(axis=0)


def normalize(series, reference, spec: NormalizationSpec | None = None) -> TimeSeries:
    """Scale ``series`` with parameters fitted on ``reference``.

    Test values outside the reference range are not clipped.  Channels that
    are constant in the reference map to zero.
    """
    spec = spec or NormalizationSpec()
    x = _values(series)
    ref = _values(reference)
    if x.shape[1] != ref.shape[1]:
        raise ValueError(f"channel mismatch: {x.shape[1]} vs reference {ref.shape[1]}")
    offset, scale = fit_normalizer(ref, spec)
    degenerate = scale == 0
    out = (x - offset) / np.where(degenerate, 1.0, scale)
    out[:, degenerate] = 0.0
    names = series.channel_names if isinstance(series, TimeSeries) else None
    return TimeSeries(out, names)


def _pad_to_length(window_scores: np.ndarray, tau: int, alignment: Alignment) -> np.ndarray:
    pad = np.full(tau - 1, window_scores[0] if alignment is Alignment.LAST else window_scores[-1])
    if alignment is Alignment.LAST:
        return np.concatenate((pad, window_scores))
    return np.concatenate((window_scores, pad))


def case1_random_scores(length: int, seed: int = 0) -> np.ndarray:
    """Uniform ``[0, 1)`` scores from a counter-based (Philox) stream."""
    if length < 1:
        raise ValueError("length must be >= 1")
    return np.random.Generator(np.random.Philox(seed)).random(length)


def _error_to_score(sq_error_sum: np.ndarray, tau: int, n_channels: int, score_form: str):
    if score_form == "l2":
        return np.sqrt(sq_error_sum) / tau
    if score_form == "mse":
        return sq_error_sum / (tau * n_channels)
    raise ValueError(f"unknown score form {score_form!r}; expected 'l2' or 'mse'")


def case2_input_norm_scores(
    series,
    wspec: WindowSpec | None = None,
    nspec: NormalizationSpec | None = None,
    reference=None,
    score_form: str = "l2",
) -> np.ndarray:
    """Window norm of the normalised input, one score per time step.

    ``reference`` defaults to ``series`` itself when no training split is
    available.
    """
    wspec = wspec or WindowSpec()
    x = normalize(series, series if reference is None else reference, nspec).values
    if wspec.tau > x.shape[0]:
        raise ValueError(f"window length {wspec.tau} exceeds series length {x.shape[0]}")
    row_sq = np.einsum("tn,tn->t", x, x)
    window_sq = sliding_window_view(row_sq, wspec.tau).sum(axis=-1)
    scores = _error_to_score(window_sq, wspec.tau, x.shape[1], score_form)
    return _pad_to_length(scores, wspec.tau, wspec.alignment)


@dataclass
class RandomLSTMAutoencoder:
    """Frozen single-layer LSTM encoder, single-layer LSTM decoder, linear read-out.

    The decoder starts from the encoder's final ``(h, c)`` and receives the
    encoder's final hidden state as input at every step.  Gate order in the
    stacked weight matrices is input, forget, candidate, output.  All biases
    are zero.
    """

    n_channels: int
    config: RandomModelConfig = field(default_factory=RandomModelConfig)

    def __post_init__(self):
        h, n, sigma = self.config.hidden_size, self.n_channels, self.config.weight_sigma
        rng = np.random.default_rng(self.config.seed)
        # all weights drawn up front so batching order cannot affect them
        self.enc_wx = rng.normal(0.0, sigma, (n, 4 * h))
        self.enc_wh = rng.normal(0.0, sigma, (h, 4 * h))
        self.dec_wx = rng.normal(0.0, sigma, (h, 4 * h))
        self.dec_wh = rng.normal(0.0, sigma, (h, 4 * h))
        self.out_w = rng.normal(0.0, sigma, (h, n))
        self._gate_scale = np.concatenate(
            (np.full(2 * h, 0.5), np.ones(h), np.full(h, 0.5))
        )

    def _cell(self, gates, c):
        h = self.config.hidden_size
        # one tanh for all gates: sigmoid(z) = (1 + tanh(z / 2)) / 2
        z = np.tanh(gates * self._gate_scale)
        i = 0.5 + 0.5 * z[:, :h]
        f = 0.5 + 0.5 * z[:, h:2 * h]
        o = 0.5 + 0.5 * z[:, 3 * h:]
        c = f * c + i * z[:, 2 * h:3 * h]
        return o * np.tanh(c), c

    def reconstruct(self, windows: np.ndarray) -> np.ndarray:
        """Map a ``(B, tau, N)`` batch to its ``(B, tau, N)`` reconstruction."""
        b, tau, _ = windows.shape
        hdim = self.config.hidden_size
        x_proj = windows @ self.enc_wx
        h = np.zeros((b, hdim))
        c = np.zeros((b, hdim))
        for t in range(tau):
            h, c = self._cell(x_proj[:, t] + h @ self.enc_wh, c)
        latent_proj = h @ self.dec_wx
        out = np.empty((b, tau, hdim))
        for t in range(tau):
            h, c = self._cell(latent_proj + h @ self.dec_wh, c)
            out[:, t] = h
        return out @ self.out_w


def case3_untrained_model_scores(
    series,
    wspec: WindowSpec | None = None,
    nspec: NormalizationSpec | None = None,
    mconfig: RandomModelConfig | None = None,
    reference=None,
    score_form: str = "l2",
    batch_size: int = 1024,
) -> np.ndarray:
    """Reconstruction error of a randomly initialised, untrained LSTM autoencoder."""
    wspec = wspec or WindowSpec()
    mconfig = mconfig or RandomModelConfig()
    x = normalize(series, series if reference is None else reference, nspec)
    windows = make_windows(x, wspec)
    model = RandomLSTMAutoencoder(x.N, mconfig)
    sq = np.empty(windows.shape[0])
    for lo in range(0, windows.shape[0], batch_size):
        w = windows[lo:lo + batch_size]
        err = w - model.reconstruct(w)
        sq[lo:lo + batch_size] = np.einsum("btn,btn->b", err, err)
    scores = _error_to_score(sq, wspec.tau, x.N, score_form)
    return _pad_to_length(scores, wspec.tau, wspec.alignment)


def baseline_scores(
    case: Case | str,
    series,
    seed: int = 0,
    wspec: WindowSpec | None = None,
    nspec: NormalizationSpec | None = None,
    mconfig: RandomModelConfig | None = None,
    reference=None,
) -> np.ndarray:
    case = Case(case)
    if case is Case.CASE1:
        return case1_random_scores(len(_values(series)), seed)
    if case is Case.CASE2:
        return case2_input_norm_scores(series, wspec, nspec, reference)
    mconfig = mconfig or RandomModelConfig()
    mconfig = RandomModelConfig(mconfig.hidden_size, mconfig.weight_sigma, seed)
    return case3_untrained_model_scores(series, wspec, nspec, mconfig, reference)


@dataclass(frozen=True)
class SeedSummary:
    values: np.ndarray

    @property
    def mean(self) -> float:
        return float(np.mean(self.values))

    @property
    def std(self) -> float:
        return float(np.std(self.values, ddof=1)) if self.values.size > 1 else 0.0

    def __str__(self):
        return f"{self.mean:.3f} ± {self.std:.3f}"


def best_f1_over_seeds(
    case: Case | str,
    series,
    labels,
    seeds=range(5),
    config: ProtocolConfig | None = None,
    **kwargs,
) -> SeedSummary:
    """Best-threshold F1 of one baseline, repeated over seeds.

    Case 2 has no randomness and is evaluated once.
    """
    y = as_labels(labels)
    if Case(case) is Case.CASE2:
        seeds = [0]
    f1 = [
        sweep_best_f1(baseline_scores(case, series, seed=s, **kwargs), y, config).best_f1
        for s in seeds
    ]
    return SeedSummary(np.asarray(f1))


def window_size_sweep(
    series,
    labels,
    taus,
    case: Case | str = Case.CASE2,
    reference=None,
    nspec: NormalizationSpec | None = None,
    mconfig: RandomModelConfig | None = None,
    seed: int = 0,
    alignment: Alignment = Alignment.LAST,
) -> list[tuple[int, float]]:
    """Best point-wise F1 for each window length."""
    case = Case(case)
    if case is Case.CASE1:
        raise ValueError("window sweep applies to Case 2 and Case 3 only")
    y = as_labels(labels)
    check_lengths(_values(series), y)
    rows = []
    for tau in taus:
        scores = baseline_scores(
            case, series, seed=seed, wspec=WindowSpec(int(tau), alignment),
            nspec=nspec, mconfig=mconfig, reference=reference,
        )
        rows.append((int(tau), sweep_best_f1(scores, y, ProtocolConfig.point()).best_f1))
    return rows
