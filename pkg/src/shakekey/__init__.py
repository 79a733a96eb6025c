"""Key generation from shared motion.

Two devices shaken together each turn their own accelerometer trace into a
short bit string; matching strings pair the devices.
"""
from . import errors
from .errors import *  # noqa: F401,F403
from .evaluation import (
    ConfusionMatrix,
    PairDataset,
    accuracy,
    build_negative_pairs,
    evaluate,
    f1,
    grid_search,
)
from .features import (
    FEATURE_NAMES,
    FeatureBounds,
    FeatureVector,
    NormalizedFeatureVector,
    calibrate_bounds,
    count_peaks,
    extract_features,
    normalize_features,
)
from .keygen import Key, generate_key, quantize_value
from .matching import hamming_distance, relaxed_match, strict_match
from .pairsim import PairingMessage, PairingOutcome, inspect_transcript, run_pairing_session
from .pipeline import PipelineConfig, derive_key
from .preprocess import NormSignal, box_filter, detect_bump, euclidean_norm, trim_after_bump
from .signal import (
    AccelTrace,
    SynthConfig,
    TriAxialSample,
    load_trace_csv,
    synth_independent_pair,
    synth_shared_pair,
    write_trace_csv,
)

__all__ = errors.__all__ + [
    "ConfusionMatrix",
    "PairDataset",
    "accuracy",
    "build_negative_pairs",
    "evaluate",
    "f1",
    "grid_search",
    "FEATURE_NAMES",
    "FeatureBounds",
    "FeatureVector",
    "NormalizedFeatureVector",
    "calibrate_bounds",
    "count_peaks",
    "extract_features",
    "normalize_features",
    "Key",
    "generate_key",
    "quantize_value",
    "hamming_distance",
    "relaxed_match",
    "strict_match",
    "PairingMessage",
    "PairingOutcome",
    "inspect_transcript",
    "run_pairing_session",
    "PipelineConfig",
    "derive_key",
    "NormSignal",
    "box_filter",
    "detect_bump",
    "euclidean_norm",
    "trim_after_bump",
    "AccelTrace",
    "SynthConfig",
    "TriAxialSample",
    "load_trace_csv",
    "synth_independent_pair",
    "synth_shared_pair",
    "write_trace_csv",
]

__version__ = "0.1.0"
