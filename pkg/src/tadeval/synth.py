"""Deterministic multivariate test signals with labelled anomaly injection.

The generated signal is split in two: the first half is an anomaly-free
training series, the second half is the test series.  Injection bounds are
given relative to the test series.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .analytic import SegmentLayout
from .core import SegmentSet, TimeSeries


class BaseSignal(enum.Enum):
    SINE_MIX = "sine_mix"
    RANDOM_WALK = "random_walk"


class InjectionKind(enum.Enum):
    POINT = "point"
    CONTEXTUAL = "contextual"
    COLLECTIVE = "collective"


@dataclass(frozen=True)
class InjectionSpec:
    """One labelled anomaly on ``[start, end)`` of the test series.

    ``magnitude`` is in units of the channel's standard deviation.  For
    ``POINT`` injections, ``density`` is the fraction of steps inside the
    segment that receive a spike; the whole segment is labelled regardless.
    """

    kind: InjectionKind
    start: int
    end: int
    channels: tuple[int, ...] = (0,)
    magnitude: float = 5.0
    density: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", InjectionKind(self.kind))
        object.__setattr__(self, "channels", tuple(int(c) for c in self.channels))
        if not 0 <= self.start < self.end:
            raise ValueError(f"invalid injection bounds [{self.start}, {self.end})")
        if not self.channels:
            raise ValueError("injection needs at least one channel")
        if not 0.0 < self.density <= 1.0:
            raise ValueError("density must lie in (0, 1]")


@dataclass(frozen=True)
class SynthSpec:
    T: int = 20_000
    N: int = 5
    base_signal: BaseSignal = BaseSignal.SINE_MIX
    noise_std: float = 0.1
    seed: int = 0
    injections: tuple[InjectionSpec, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "base_signal", BaseSignal(self.base_signal))
        object.__setattr__(self, "injections", tuple(self.injections))
        if self.T < 2 or self.N < 1:
            raise ValueError("need T >= 2 and N >= 1")
        if self.noise_std < 0:
            raise ValueError("noise_std must be non-negative")

    @property
    def train_length(self) -> int:
        return self.T // 2

    @property
    def test_length(self) -> int:
        return self.T - self.T // 2


def _base(spec: SynthSpec, rng: np.random.Generator) -> np.ndarray:
    t = np.arange(spec.T, dtype=np.float64)
    if spec.base_signal is BaseSignal.SINE_MIX:
        # periods scaled by irrational ratios so the mix never repeats exactly
        base_periods = rng.uniform(30.0, 60.0, size=(spec.N, 1)) * np.array([1.0, np.sqrt(2.0), np.pi])
        amps = rng.uniform(0.5, 1.5, size=(spec.N, 3))
        phases = rng.uniform(0.0, 2 * np.pi, size=(spec.N, 3))
        arg = 2 * np.pi * t[None, None, :] / base_periods[:, :, None] + phases[:, :, None]
        x = np.einsum("nk,nkt->tn", amps, np.sin(arg))
    else:
        x = np.cumsum(rng.normal(0.0, 0.1, size=(spec.T, spec.N)), axis=0)
    return x + rng.normal(0.0, spec.noise_std, size=x.shape) if spec.noise_std > 0 else x


def _check_injections(spec: SynthSpec):
    bounds = sorted((inj.start, inj.end) for inj in spec.injections)
    for inj in spec.injections:
        if inj.end > spec.test_length:
            raise ValueError(
                f"injection [{inj.start}, {inj.end}) exceeds test length {spec.test_length}"
            )
        if max(inj.channels) >= spec.N or min(inj.channels) < 0:
            raise ValueError(f"injection channels {inj.channels} outside [0, {spec.N})")
    for (s0, e0), (s1, e1) in zip(bounds, bounds[1:]):
        if s1 < e0:
            raise ValueError(f"overlapping injections [{s0}, {e0}) and [{s1}, {e1})")


def _inject(test: np.ndarray, inj: InjectionSpec, std: np.ndarray, rng: np.random.Generator):
    seg = slice(inj.start, inj.end)
    length = inj.end - inj.start
    ch = list(inj.channels)
    if inj.kind is InjectionKind.POINT:
        n_hits = max(1, int(round(inj.density * length)))
        hits = np.sort(rng.choice(length, size=n_hits, replace=False)) + inj.start
        test[np.ix_(hits, ch)] += inj.magnitude * std[ch]
    elif inj.kind is InjectionKind.CONTEXTUAL:
        block = test[seg, ch]
        centre = block.mean(axis=0)
        spread = block.std(axis=0)
        # square wave following the original zero crossings, same mean and std
        sign = np.where(block >= centre, 1.0, -1.0)
        sign_std = sign.std(axis=0)
        wave = (sign - sign.mean(axis=0)) / np.where(sign_std > 0, sign_std, 1.0)
        test[seg, ch] = centre + spread * wave
    else:
        steps = rng.normal(0.0, 1.0, size=(length, len(ch)))
        drift = np.cumsum(steps, axis=0) / np.sqrt(length)
        test[seg, ch] += 0.1 * inj.magnitude * std[ch] * drift


def generate(spec: SynthSpec) -> tuple[TimeSeries, TimeSeries, np.ndarray]:
    """Return ``(train, test, test_labels)``; the same spec always gives the same data."""
    _check_injections(spec)
    rng = np.random.default_rng(spec.seed)
    x = _base(spec, rng)
    train = x[: spec.train_length].copy()
    test = x[spec.train_length:].copy()
    std = train.std(axis=0)
    labels = np.zeros(spec.test_length, dtype=np.int8)
    for inj in spec.injections:
        _inject(test, inj, std, rng)
        labels[inj.start:inj.end] = 1
    names = tuple(f"ch{i}" for i in range(spec.N))
    return TimeSeries(train, names), TimeSeries(test, names), labels


def layout_from_stats(T: int, gamma: float, M: int, seed: int = 0) -> SegmentLayout:
    """``M`` near-equal, non-touching segments covering ``round(gamma * T)`` steps.

    Placement is uniform over all arrangements that keep at least one normal
    step between consecutive segments.
    """
    total = int(round(gamma * T))
    if M < 0 or not 0.0 <= gamma <= 1.0:
        raise ValueError("need M >= 0 and 0 <= gamma <= 1")
    if M == 0:
        return SegmentLayout(SegmentSet((), T))
    if total < M:
        raise ValueError(f"gamma * T = {gamma * T:g} cannot hold {M} segments")
    free = T - total - (M - 1)
    if free < 0:
        raise ValueError(f"cannot pack {M} segments totalling {total} into length {T}")
    lengths = np.full(M, total // M, dtype=np.int64)
    lengths[: total % M] += 1
    rng = np.random.default_rng(seed)
    lengths = rng.permutation(lengths)
    # stars and bars: sorted draws without replacement -> non-decreasing offsets
    offsets = np.sort(rng.choice(free + M, size=M, replace=False)) - np.arange(M)
    starts = offsets + np.concatenate(([0], np.cumsum(lengths)[:-1])) + np.arange(M)
    bounds = [(int(s), int(s + n)) for s, n in zip(starts, lengths)]
    return SegmentLayout(SegmentSet.from_bounds(bounds, T))


def point_anomaly_spec(
    test_length: int = 5000,
    n_segments: int = 5,
    segment_length: tuple[int, int] = (80, 160),
    N: int = 5,
    magnitude: float = 6.0,
    density: float = 0.1,
    channels_per_anomaly: int = 2,
    seed: int = 0,
) -> SynthSpec:
    """Sine-mix data whose labelled periods contain intermittent spikes.

    Each segment is labelled in full but only a ``density`` fraction of its
    steps is spiked, mimicking coarse labels around short point anomalies.
    Segments are spread evenly over the test series.
    """
    rng = np.random.default_rng([seed, 7919])
    lo, hi = segment_length
    lengths = rng.integers(lo, hi + 1, size=n_segments)
    gap = (test_length - int(lengths.sum())) // (n_segments + 1)
    if gap < 1:
        raise ValueError("segments do not fit in the test series")
    injections, pos = [], gap
    for n in lengths:
        ch = tuple(sorted(rng.choice(N, size=min(channels_per_anomaly, N), replace=False).tolist()))
        injections.append(InjectionSpec(InjectionKind.POINT, pos, pos + int(n), ch, magnitude, density))
        pos += int(n) + gap
    return SynthSpec(T=2 * test_length, N=N, seed=seed, injections=tuple(injections))
