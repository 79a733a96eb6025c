"""Positive/negative pair datasets, confusion matrices, metrics and grid search."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import EmptyMatrix, InsufficientData, InsufficientSubjects, ShakeKeyError, UndefinedF1
from .features import FeatureBounds, bounds_from_features, normalize_features
from .keygen import generate_key
from .pipeline import PipelineConfig, derive_key, match, trace_features
from .signal import AccelTrace

log = logging.getLogger(__name__)

DEFAULT_NB_GRID = tuple(range(1, 9))
DEFAULT_KS_GRID = (1, 5, 10, 15, 20, 25, 30, 40, 50)
CRITERIA = ("accuracy", "f1")


@dataclass(frozen=True)
class PositivePair:
    trace_a: AccelTrace
    trace_b: AccelTrace
    subject: int
    shake: int


@dataclass(frozen=True)
class NegativePair:
    trace_a: AccelTrace
    trace_b: AccelTrace
    subjects: tuple  # (subject of trace_a, subject of trace_b)
    shakes: tuple


@dataclass(frozen=True)
class PairDataset:
    positives: tuple
    negatives: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "positives", tuple(self.positives))
        object.__setattr__(self, "negatives", tuple(self.negatives))
        for neg in self.negatives:
            if neg.subjects[0] == neg.subjects[1]:
                raise ValueError(f"negative pair reuses subject {neg.subjects[0]}")

    @classmethod
    def from_recordings(cls, recordings: dict, n_negatives: int = 300, seed: int = 0) -> "PairDataset":
        """Build D1 from ``{(subject, shake): (dev1, dev2)}`` and sample D2 from it."""
        positives = [PositivePair(a, b, subj, shake) for (subj, shake), (a, b) in sorted(recordings.items())]
        negatives = build_negative_pairs(positives, n_negatives, seed) if n_negatives else ()
        return cls(positives, negatives)

    def pairs(self):
        """Yield ``(label, trace_a, trace_b)`` with label True for shared motion."""
        for p in self.positives:
            yield True, p.trace_a, p.trace_b
        for n in self.negatives:
            yield False, n.trace_a, n.trace_b


@dataclass(frozen=True)
class ConfusionMatrix:
    """Positives on the first row: ``[[tp, fn], [fp, tn]]``."""

    tp: int = 0
    fn: int = 0
    fp: int = 0
    tn: int = 0
    skipped_positive: int = 0
    skipped_negative: int = 0

    def __post_init__(self):
        if min(self.tp, self.fn, self.fp, self.tn, self.skipped_positive, self.skipped_negative) < 0:
            raise ValueError("confusion matrix counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fn + self.fp + self.tn

    @property
    def skipped(self) -> int:
        return self.skipped_positive + self.skipped_negative

    def as_array(self) -> np.ndarray:
        return np.array([[self.tp, self.fn], [self.fp, self.tn]])

    def to_dict(self) -> dict:
        return {
            "tp": self.tp, "fn": self.fn, "fp": self.fp, "tn": self.tn,
            "skipped_positive": self.skipped_positive,
            "skipped_negative": self.skipped_negative,
        }


def accuracy(cm: ConfusionMatrix) -> float:
    if cm.total == 0:
        raise EmptyMatrix("accuracy of an empty confusion matrix")
    return (cm.tp + cm.tn) / cm.total


def f1(cm: ConfusionMatrix) -> float:
    denom = 2 * cm.tp + cm.fp + cm.fn
    if denom == 0:
        raise UndefinedF1("F1 undefined: no positives predicted or present")
    return 2 * cm.tp / denom


def build_negative_pairs(positives, count: int, seed) -> tuple:
    """Sample ``count`` different-motion pairs from shared-motion recordings.

    Two distinct subjects are drawn uniformly, then one recording of each; the
    first subject contributes its device-1 trace, the second its device-2 trace.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    by_subject = {}
    for p in positives:
        by_subject.setdefault(p.subject, []).append(p)
    subjects = sorted(by_subject)
    if len(subjects) < 2:
        raise InsufficientSubjects(f"need at least 2 subjects, got {len(subjects)}")
    for s in subjects:
        by_subject[s].sort(key=lambda p: p.shake)
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        i, j = rng.choice(len(subjects), size=2, replace=False)
        first, second = by_subject[subjects[i]], by_subject[subjects[j]]
        pa = first[rng.integers(len(first))]
        pb = second[rng.integers(len(second))]
        out.append(NegativePair(pa.trace_a, pb.trace_b, (pa.subject, pb.subject), (pa.shake, pb.shake)))
    return tuple(out)


def calibrate_dataset_bounds(dataset: PairDataset, config: PipelineConfig, margin: float = 0.1) -> FeatureBounds:
    """Bounds from all device-1 traces, preprocessed under ``config``.

    Traces the pipeline cannot process are left out.
    """
    vectors = []
    for p in dataset.positives:
        try:
            vectors.append(trace_features(p.trace_a, config))
        except ShakeKeyError as exc:
            log.debug("calibration skips subject %s shake %s: %s", p.subject, p.shake, exc)
    if len(vectors) < 2:
        raise InsufficientData("fewer than 2 usable device-1 traces for calibration")
    return bounds_from_features(vectors, margin)


def _ensure_bounds(dataset: PairDataset, config: PipelineConfig) -> PipelineConfig:
    if config.bounds is not None:
        return config
    return replace(config, bounds=calibrate_dataset_bounds(dataset, config))


def evaluate(dataset: PairDataset, config: PipelineConfig) -> ConfusionMatrix:
    """Run both devices' pipelines on every pair and tally the verdicts.

    Pairs where either device fails (no bump, too short, degenerate) are skipped
    and counted in ``skipped_positive`` / ``skipped_negative``.
    """
    config = _ensure_bounds(dataset, config)
    keys = {}

    def key_of(trace):
        # traces are immutable, so one key per object is enough
        k = id(trace)
        if k not in keys:
            try:
                keys[k] = derive_key(trace, config)
            except ShakeKeyError as exc:
                keys[k] = exc
        return keys[k]

    counts = dict(tp=0, fn=0, fp=0, tn=0, skipped_positive=0, skipped_negative=0)
    for label, a, b in dataset.pairs():
        ka, kb = key_of(a), key_of(b)
        if isinstance(ka, Exception) or isinstance(kb, Exception):
            counts["skipped_positive" if label else "skipped_negative"] += 1
            continue
        same = match(ka, kb, config)
        if label:
            counts["tp" if same else "fn"] += 1
        else:
            counts["fp" if same else "tn"] += 1
    return ConfusionMatrix(**counts)


def report(cm: ConfusionMatrix, config: Optional[PipelineConfig] = None) -> dict:
    """JSON-ready evaluation report; undefined metrics become None."""
    out = {"confusion_matrix": cm.to_dict(), "skipped": cm.skipped}
    for name, fn in (("accuracy", accuracy), ("f1", f1)):
        try:
            out[name] = fn(cm)
        except (EmptyMatrix, UndefinedF1):
            out[name] = None
    if config is not None:
        out["config"] = config.to_dict()
    return out


@dataclass(frozen=True)
class GridCell:
    nb: int
    kernel_size: int
    cm: ConfusionMatrix
    accuracy: float
    f1: float

    def score(self, criterion: str) -> float:
        return getattr(self, criterion)


@dataclass(frozen=True)
class GridResult:
    best: PipelineConfig
    best_cell: GridCell
    criterion: str
    surface: tuple = field(default_factory=tuple)


def _safe(metric, cm):
    try:
        return metric(cm)
    except (EmptyMatrix, UndefinedF1):
        return float("nan")


def grid_search(dataset: PairDataset, nb_values=DEFAULT_NB_GRID, ks_values=DEFAULT_KS_GRID,
                criterion: str = "accuracy", mode: Optional[str] = None,
                base: Optional[PipelineConfig] = None) -> GridResult:
    """Exhaustive search over bits-per-feature and box-filter width.

    Features are computed once per kernel size and re-quantized for each nb.
    Bounds are calibrated per kernel size unless ``base.bounds`` is set. Ties
    go to the smaller nb, then the smaller kernel.
    """
    if criterion not in CRITERIA:
        raise ValueError(f"criterion must be one of {CRITERIA}")
    nb_values = sorted(set(nb_values))
    ks_values = sorted(set(ks_values))
    if not nb_values or not ks_values:
        raise ValueError("grids must be non-empty")
    base = base or PipelineConfig()
    if mode is not None:
        base = replace(base, mode=mode)

    surface = {}
    for ks in ks_values:
        ks_config = _ensure_bounds(dataset, replace(base, kernel_size=ks, nb=nb_values[0]))
        normed = {}

        def nfv_of(trace):
            k = id(trace)
            if k not in normed:
                try:
                    normed[k] = normalize_features(trace_features(trace, ks_config), ks_config.bounds)
                except ShakeKeyError as exc:
                    normed[k] = exc
            return normed[k]

        pairs = [(label, nfv_of(a), nfv_of(b)) for label, a, b in dataset.pairs()]
        for nb in nb_values:
            cell_config = replace(ks_config, nb=nb)
            counts = dict(tp=0, fn=0, fp=0, tn=0, skipped_positive=0, skipped_negative=0)
            for label, na, nb_ in pairs:
                if isinstance(na, Exception) or isinstance(nb_, Exception):
                    counts["skipped_positive" if label else "skipped_negative"] += 1
                    continue
                same = match(generate_key(na, nb), generate_key(nb_, nb), cell_config)
                if label:
                    counts["tp" if same else "fn"] += 1
                else:
                    counts["fp" if same else "tn"] += 1
            cm = ConfusionMatrix(**counts)
            surface[(nb, ks)] = (GridCell(nb, ks, cm, _safe(accuracy, cm), _safe(f1, cm)), cell_config)

    best_cell, best_config = None, None
    for key in sorted(surface):
        cell, cfg = surface[key]
        s = cell.score(criterion)
        if np.isnan(s):
            continue
        if best_cell is None or s > best_cell.score(criterion):
            best_cell, best_config = cell, cfg
    if best_cell is None:
        raise EmptyMatrix(f"no grid cell has a defined {criterion}")
    cells = tuple(surface[k][0] for k in sorted(surface))
    return GridResult(best_config, best_cell, criterion, cells)
