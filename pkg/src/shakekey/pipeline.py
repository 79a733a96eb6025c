"""One device's path from a raw trace to a key, under a static configuration."""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional

from .errors import InvalidConfig, InvalidKernelSize
from .features import FeatureBounds, NormalizedFeatureVector, extract_features, normalize_features
from .keygen import MAX_NB, Key, generate_key
from .matching import DEFAULT_AGREE_FRACTION, MODES, keys_match
from .preprocess import DEFAULT_SKIP, DEFAULT_THRESHOLD, DEFAULT_TRIM_LEN, preprocess
from .signal import AccelTrace


@dataclass(frozen=True)
class PipelineConfig:
    """Everything both devices must agree on before pairing.

    ``kernel_size=1`` means no filtering (the raw norm signal). ``bounds`` may be
    left as None for evaluation, which then calibrates them from the dataset.
    """

    nb: int = 4
    kernel_size: int = 5
    threshold: float = DEFAULT_THRESHOLD
    skip: int = DEFAULT_SKIP
    trim_len: int = DEFAULT_TRIM_LEN
    bounds: Optional[FeatureBounds] = None
    mode: str = "relaxed"
    agree_fraction: float = DEFAULT_AGREE_FRACTION

    def __post_init__(self):
        if not isinstance(self.nb, int) or not 1 <= self.nb <= MAX_NB:
            raise InvalidConfig(f"nb must be an integer in [1, {MAX_NB}], got {self.nb}")
        if not isinstance(self.kernel_size, int) or self.kernel_size < 1:
            raise InvalidKernelSize(f"kernel_size must be a positive integer, got {self.kernel_size}")
        if not self.threshold > 0:
            raise InvalidConfig("threshold must be positive")
        if self.skip < 0 or self.trim_len < 3:
            raise InvalidConfig("skip must be >= 0 and trim_len >= 3")
        if self.mode not in MODES:
            raise InvalidConfig(f"mode must be one of {MODES}, got {self.mode!r}")
        if not 0.0 < self.agree_fraction <= 1.0:
            raise InvalidConfig("agree_fraction must be in (0, 1]")
        if self.bounds is not None and not isinstance(self.bounds, FeatureBounds):
            raise InvalidConfig("bounds must be a FeatureBounds or None")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["bounds"] = self.bounds.to_dict() if self.bounds is not None else None
        return d


def trace_features(trace: AccelTrace, config: PipelineConfig):
    signal = preprocess(trace, config.kernel_size, config.threshold, config.skip, config.trim_len)
    return extract_features(signal)


def normalized_features(trace: AccelTrace, config: PipelineConfig) -> NormalizedFeatureVector:
    if config.bounds is None:
        raise InvalidConfig("config.bounds must be set to normalize features")
    return normalize_features(trace_features(trace, config), config.bounds)


def derive_key(trace: AccelTrace, config: PipelineConfig) -> Key:
    """Preprocess, extract, normalize and quantize one device's trace."""
    return generate_key(normalized_features(trace, config), config.nb)


def match(k1: Key, k2: Key, config: PipelineConfig) -> bool:
    return keys_match(k1, k2, config.mode, config.agree_fraction)
