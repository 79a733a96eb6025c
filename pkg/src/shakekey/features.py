"""The ten whole-signal time-domain features and their [0, 1] normalization."""
from __future__ import annotations

import json
import math
from dataclasses import astuple, dataclass, fields

import numpy as np

from .errors import DegenerateSignal, InsufficientData, InvalidBounds, SignalTooShort
from .preprocess import NormSignal

FEATURE_NAMES = (
    "num_peaks",
    "rms",
    "mean",
    "variance",
    "skewness",
    "kurtosis",
    "crest_factor",
    "peak_to_peak",
    "autocorr_lag1",
    "avg_power",
)
MIN_VARIANCE = 1e-12


@dataclass(frozen=True)
class FeatureVector:
    num_peaks: int
    rms: float
    mean: float
    variance: float
    skewness: float
    kurtosis: float
    crest_factor: float
    peak_to_peak: float
    autocorr_lag1: float
    avg_power: float

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=float)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class NormalizedFeatureVector:
    num_peaks: float
    rms: float
    mean: float
    variance: float
    skewness: float
    kurtosis: float
    crest_factor: float
    peak_to_peak: float
    autocorr_lag1: float
    avg_power: float

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{f.name}={v} outside [0, 1]")

    @classmethod
    def from_array(cls, values) -> "NormalizedFeatureVector":
        return cls(*(float(v) for v in values))

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=float)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class FeatureBounds:
    """Per-feature ``(lo, hi)`` normalization ranges, in feature order."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) != len(FEATURE_NAMES) or len(hi) != len(FEATURE_NAMES):
            raise InvalidBounds(f"need {len(FEATURE_NAMES)} (lo, hi) pairs")
        for name, a, b in zip(FEATURE_NAMES, lo, hi):
            if not (math.isfinite(a) and math.isfinite(b) and b > a):
                raise InvalidBounds(f"{name}: need finite lo < hi, got ({a}, {b})")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def to_dict(self) -> dict:
        return {name: {"lo": a, "hi": b} for name, a, b in zip(FEATURE_NAMES, self.lo, self.hi)}

    @classmethod
    def from_dict(cls, data: dict) -> "FeatureBounds":
        try:
            pairs = [(data[name]["lo"], data[name]["hi"]) for name in FEATURE_NAMES]
        except (KeyError, TypeError) as exc:
            raise InvalidBounds(f"bounds missing entry: {exc}") from None
        lo, hi = zip(*pairs)
        return cls(lo, hi)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "FeatureBounds":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def count_peaks(signal: NormSignal) -> int:
    """Local maxima (strict rise, non-strict fall) lying above the signal mean."""
    x = signal.values
    if len(x) < 3:
        raise SignalTooShort("peak counting needs at least 3 samples")
    mid = x[1:-1]
    is_peak = (x[:-2] < mid) & (mid >= x[2:]) & (mid > x.mean())
    return int(np.count_nonzero(is_peak))


def extract_features(signal: NormSignal) -> FeatureVector:
    x = signal.values
    n = len(x)
    if n < 3:
        raise SignalTooShort("feature extraction needs at least 3 samples")
    mu = x.mean()
    d = x - mu
    var = float(np.mean(d * d))
    if var < MIN_VARIANCE:
        raise DegenerateSignal(f"variance {var:.3g} below {MIN_VARIANCE}")
    sigma = math.sqrt(var)
    power = float(np.mean(x * x))
    rms = math.sqrt(power)
    return FeatureVector(
        num_peaks=count_peaks(signal),
        rms=rms,
        mean=float(mu),
        variance=var,
        skewness=float(np.mean(d**3)) / sigma**3,
        kurtosis=float(np.mean(d**4)) / var**2,
        crest_factor=float(x.max()) / rms,
        peak_to_peak=float(x.max() - x.min()),
        autocorr_lag1=float(np.dot(d[:-1], d[1:])) / float(np.dot(d, d)),
        avg_power=power,
    )


def normalize_features(fv: FeatureVector, bounds: FeatureBounds) -> NormalizedFeatureVector:
    if not isinstance(bounds, FeatureBounds):
        raise InvalidBounds("bounds must be a FeatureBounds")
    lo = np.array(bounds.lo)
    hi = np.array(bounds.hi)
    scaled = (fv.as_array() - lo) / (hi - lo)
    return NormalizedFeatureVector.from_array(np.clip(scaled, 0.0, 1.0))


def bounds_from_features(vectors, margin: float = 0.1) -> FeatureBounds:
    """Observed min/max per feature, widened by ``margin`` of the range per side.

    A feature that never varies gets a unit-wide range around its value.
    """
    if margin < 0:
        raise ValueError("margin must be non-negative")
    table = np.array([v.as_array() for v in vectors])
    if len(table) < 2:
        raise InsufficientData("calibration needs at least 2 feature vectors")
    lo, hi = table.min(axis=0), table.max(axis=0)
    pad = margin * (hi - lo)
    lo, hi = lo - pad, hi + pad
    flat = hi <= lo
    lo[flat] -= 0.5
    hi[flat] += 0.5
    return FeatureBounds(tuple(lo), tuple(hi))


def calibrate_bounds(signals, margin: float = 0.1) -> FeatureBounds:
    signals = list(signals)
    if len(signals) < 2:
        raise InsufficientData("calibration needs at least 2 signals")
    return bounds_from_features([extract_features(s) for s in signals], margin)
