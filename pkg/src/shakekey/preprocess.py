"""Bump synchronization, Euclidean-norm reduction and box-filter smoothing."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientSamples, InvalidKernelSize, InvalidTrace, NoBumpDetected
from .signal import AccelTrace

DEFAULT_THRESHOLD = 30.0  # m/s^2
DEFAULT_SKIP = 20  # samples, drops the bump transient
DEFAULT_TRIM_LEN = 500  # samples


@dataclass(frozen=True, eq=False)
class NormSignal:
    """One-dimensional non-negative signal, e.g. per-sample acceleration norm."""

    sample_rate: float
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float).ravel()
        if len(values) < 2:
            raise InvalidTrace("a norm signal needs at least 2 values")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise InvalidTrace("norm values must be finite and non-negative")
        if not (math.isfinite(self.sample_rate) and self.sample_rate > 0):
            raise InvalidTrace(f"sample_rate must be positive, got {self.sample_rate}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return len(self.values)

    def __eq__(self, other):
        if not isinstance(other, NormSignal):
            return NotImplemented
        return self.sample_rate == other.sample_rate and np.array_equal(self.values, other.values)

    __hash__ = None


def euclidean_norm(trace: AccelTrace) -> NormSignal:
    xyz = trace.xyz
    return NormSignal(trace.sample_rate, np.sqrt(np.sum(xyz * xyz, axis=1)))


def detect_bump(signal: NormSignal, threshold: float = DEFAULT_THRESHOLD) -> int:
    """Index of the first sample strictly above ``threshold``."""
    if not threshold > 0:
        raise ValueError(f"threshold must be positive, got {threshold}")
    above = np.flatnonzero(signal.values > threshold)
    if len(above) == 0:
        raise NoBumpDetected(
            f"no sample exceeds {threshold} (max {float(np.max(signal.values)):.3g})"
        )
    return int(above[0])


def trim_after_bump(signal: NormSignal, bump_index: int, skip: int = DEFAULT_SKIP,
                    length: int = DEFAULT_TRIM_LEN) -> NormSignal:
    if length < 2 or skip < 0 or bump_index < 0:
        raise ValueError("need length >= 2 and non-negative skip and bump_index")
    start = bump_index + skip
    if start + length > len(signal):
        raise InsufficientSamples(
            f"need {start + length} samples (bump {bump_index} + skip {skip} + {length}), "
            f"have {len(signal)}"
        )
    return NormSignal(signal.sample_rate, signal.values[start:start + length])


def box_filter(signal: NormSignal, kernel_size: int) -> NormSignal:
    """Centered moving average with truncated, renormalized windows at the edges.

    The window for sample i spans ``[i - (k-1)//2, i + k - 1 - (k-1)//2]``, so
    even kernels lean one sample to the right.
    """
    if int(kernel_size) != kernel_size or kernel_size < 1:
        raise InvalidKernelSize(f"kernel_size must be a positive integer, got {kernel_size}")
    k = int(kernel_size)
    x = signal.values
    if k == 1:
        return signal
    n = len(x)
    left = (k - 1) // 2
    right = k - 1 - left
    sums = np.convolve(x, np.ones(k), mode="full")[right:right + n]
    idx = np.arange(n)
    counts = np.minimum(idx + right, n - 1) - np.maximum(idx - left, 0) + 1
    out = sums / counts
    # clip float noise so the min/max bounds of the input are kept
    return NormSignal(signal.sample_rate, np.clip(out, x.min(), x.max()))


def preprocess(trace: AccelTrace, kernel_size: int = 1, threshold: float = DEFAULT_THRESHOLD,
               skip: int = DEFAULT_SKIP, length: int = DEFAULT_TRIM_LEN) -> NormSignal:
    """Norm, bump-detect and trim on the raw norm, then filter."""
    norm = euclidean_norm(trace)
    bump = detect_bump(norm, threshold)
    return box_filter(trim_after_bump(norm, bump, skip, length), kernel_size)
