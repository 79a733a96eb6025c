"""Key-strength estimation with a multivariate Bernoulli mixture.

The mixture is fitted by EM, its size chosen by BIC, and the Shannon entropy
of the fitted distribution estimated by Monte Carlo.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientData, LengthMismatch
from .keygen import Key

EPS = 1e-6


def as_bit_matrix(keys) -> np.ndarray:
    """Stack keys (Key, '0'/'1' strings or 0/1 sequences) into an (n, D) float array."""
    rows = []
    for k in keys:
        if isinstance(k, Key):
            k = k.bits
        if isinstance(k, str):
            rows.append([c == "1" for c in k])
        else:
            rows.append(list(k))
    if not rows:
        raise InsufficientData("no keys given")
    lengths = {len(r) for r in rows}
    if len(lengths) != 1:
        raise LengthMismatch(f"keys of different lengths: {sorted(lengths)}")
    x = np.asarray(rows, dtype=float)
    if not np.all((x == 0) | (x == 1)):
        raise ValueError("keys must contain only 0/1 values")
    return x


def _logsumexp(a: np.ndarray) -> np.ndarray:
    m = np.max(a, axis=1, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    return (m + np.log(np.sum(np.exp(a - m), axis=1, keepdims=True)))[:, 0]


@dataclass(frozen=True, eq=False)
class BernoulliMixture:
    weights: np.ndarray
    probs: np.ndarray
    log_likelihoods: tuple = field(default=(), repr=False)  # per EM iteration, if fitted

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).ravel()
        p = np.array(self.probs, dtype=float)
        if p.ndim == 1:
            p = p[None, :]
        if p.ndim != 2 or p.shape[0] != len(w) or len(w) < 1:
            raise ValueError(f"weights {w.shape} and probs {p.shape} disagree")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
            raise ValueError("weights must lie on the probability simplex")
        if np.any(p < EPS) or np.any(p > 1 - EPS):
            raise ValueError(f"probs must lie in [{EPS}, {1 - EPS}]")
        w.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "probs", p)

    @property
    def n_components(self) -> int:
        return len(self.weights)

    @property
    def n_bits(self) -> int:
        return self.probs.shape[1]

    @property
    def n_params(self) -> int:
        k, d = self.probs.shape
        return (k - 1) + k * d

    def component_log_probs(self, x: np.ndarray) -> np.ndarray:
        """(n, K) array of log weight_k + log P(x | component k)."""
        if x.shape[1] != self.n_bits:
            raise LengthMismatch(f"keys have {x.shape[1]} bits, model has {self.n_bits}")
        with np.errstate(divide="ignore"):
            log_w = np.log(self.weights)
        return x @ np.log(self.probs).T + (1 - x) @ np.log1p(-self.probs).T + log_w

    def log_prob(self, keys) -> np.ndarray:
        """Per-key natural-log probability."""
        x = keys if isinstance(keys, np.ndarray) else as_bit_matrix(keys)
        return _logsumexp(self.component_log_probs(x))

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        z = rng.choice(self.n_components, size=n, p=self.weights)
        return (rng.random((n, self.n_bits)) < self.probs[z]).astype(float)


def log_likelihood(model: BernoulliMixture, keys) -> float:
    return float(np.sum(model.log_prob(keys)))


def em_fit(keys, n_components: int, seed=None, max_iter: int = 500, tol: float = 1e-7) -> BernoulliMixture:
    """Fit a K-component Bernoulli mixture by EM.

    Starts from uniform weights and per-bit means jittered by +-0.1. Stops when
    an iteration improves the log-likelihood by less than ``tol``.
    """
    x = keys if isinstance(keys, np.ndarray) else as_bit_matrix(keys)
    n, d = x.shape
    if n_components < 1:
        raise ValueError("need at least one component")
    if n < n_components:
        raise InsufficientData(f"{n} keys cannot support {n_components} components")
    rng = np.random.default_rng(seed)
    mean = x.mean(axis=0)
    probs = np.clip(mean + rng.uniform(-0.1, 0.1, size=(n_components, d)), EPS, 1 - EPS)
    weights = np.full(n_components, 1.0 / n_components)

    history = []
    for _ in range(max_iter):
        model = BernoulliMixture(weights, probs)
        joint = model.component_log_probs(x)
        norm = _logsumexp(joint)
        history.append(float(norm.sum()))
        if len(history) > 1 and history[-1] - history[-2] < tol:
            break
        resp = np.exp(joint - norm[:, None])
        nk = resp.sum(axis=0)
        weights = nk / n
        weights = weights / weights.sum()
        alive = nk > 0
        new_probs = probs.copy()
        new_probs[alive] = (resp[:, alive].T @ x) / nk[alive, None]
        probs = np.clip(new_probs, EPS, 1 - EPS)
    else:
        model = BernoulliMixture(weights, probs)
        history.append(log_likelihood(model, x))
    return BernoulliMixture(model.weights, model.probs, tuple(history))


def bic(model: BernoulliMixture, keys) -> float:
    """Log-likelihood minus half the parameter count times ln(n); higher is better."""
    x = keys if isinstance(keys, np.ndarray) else as_bit_matrix(keys)
    return log_likelihood(model, x) - 0.5 * model.n_params * math.log(len(x))


@dataclass(frozen=True)
class SelectionResult:
    model: BernoulliMixture
    bic_table: dict  # K -> BIC of the best restart

    @property
    def k(self) -> int:
        return self.model.n_components


def bic_sweep(keys, k_max: int = 10, restarts: int = 5, seed=None,
              max_iter: int = 500, tol: float = 1e-7) -> SelectionResult:
    """Best-of-``restarts`` EM fit for each K in 1..k_max, then pick by BIC.

    K values that exceed the number of keys are left out. Ties go to smaller K.
    """
    x = keys if isinstance(keys, np.ndarray) else as_bit_matrix(keys)
    if k_max < 1 or restarts < 1:
        raise ValueError("k_max and restarts must be >= 1")
    k_max = min(k_max, len(x))
    seeds = np.random.SeedSequence(seed).spawn(k_max * restarts)
    table, best = {}, None
    for k in range(1, k_max + 1):
        fits = [em_fit(x, k, seeds[(k - 1) * restarts + r], max_iter, tol) for r in range(restarts)]
        fit = max(fits, key=lambda m: m.log_likelihoods[-1])
        table[k] = bic(fit, x)
        if best is None or table[k] > table[best.n_components]:
            best = fit
    return SelectionResult(best, table)


def select_model(keys, k_max: int = 10, restarts: int = 5, seed=None,
                 max_iter: int = 500, tol: float = 1e-7) -> BernoulliMixture:
    return bic_sweep(keys, k_max, restarts, seed, max_iter, tol).model


@dataclass(frozen=True)
class EntropyEstimate:
    bits: float
    stderr: float
    n_samples: int


def estimate_entropy(model: BernoulliMixture, n_samples: int = 100_000, seed=None) -> EntropyEstimate:
    """Monte-Carlo Shannon entropy in bits: mean of -log2 p(x) over model samples."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    x = model.sample(n_samples, rng)
    surprisal = -model.log_prob(x) / math.log(2)
    se = float(surprisal.std(ddof=1) / math.sqrt(n_samples)) if n_samples > 1 else 0.0
    return EntropyEstimate(float(surprisal.mean()), se, n_samples)


def binary_entropy_sum(probs) -> float:
    """Exact entropy in bits of independent bits with the given probabilities."""
    p = np.asarray(probs, dtype=float)
    return float(np.sum(-p * np.log2(p) - (1 - p) * np.log2(1 - p)))
