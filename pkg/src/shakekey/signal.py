"""Accelerometer traces: domain types, CSV I/O and a synthetic shake generator.

The generator stands in for recorded shake data. Two devices held in one hand
see the same latent motion, each through its own gain, noise and start offset.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import EmptyFile, InvalidConfig, InvalidTrace, MalformedRow, NonUniformSampling

CSV_HEADER = ("t", "ax", "ay", "az")
SPACING_TOL = 1e-9  # seconds

# Synthetic layout, in samples: quiet lead-in, bump pulse, and a settle margin
# appended after the motion so the default skip + trim length still fits.
LEAD_SAMPLES = 10
BUMP_SHAPE = np.array([0.2, 0.5, 1.0, 0.5, 0.2])
SETTLE_PAD = 32


class TriAxialSample(NamedTuple):
    t: float
    ax: float
    ay: float
    az: float


@dataclass(frozen=True, eq=False)
class AccelTrace:
    """Uniformly sampled tri-axial linear acceleration (gravity removed).

    ``xyz`` is an (N, 3) array in m/s^2. Timestamps are not stored; they are
    regenerated as ``t0 + i / sample_rate``.
    """

    sample_rate: float
    xyz: np.ndarray
    t0: float = 0.0

    def __post_init__(self):
        xyz = np.array(self.xyz, dtype=float)
        if xyz.ndim != 2 or xyz.shape[1] != 3:
            raise InvalidTrace(f"expected an (N, 3) array, got shape {xyz.shape}")
        if len(xyz) < 2:
            raise InvalidTrace("a trace needs at least 2 samples")
        if not (math.isfinite(self.sample_rate) and self.sample_rate > 0):
            raise InvalidTrace(f"sample_rate must be positive, got {self.sample_rate}")
        if not (math.isfinite(self.t0) and self.t0 >= 0):
            raise InvalidTrace(f"t0 must be finite and non-negative, got {self.t0}")
        if not np.all(np.isfinite(xyz)):
            raise InvalidTrace("acceleration values must be finite")
        xyz.setflags(write=False)
        object.__setattr__(self, "xyz", xyz)

    @classmethod
    def from_samples(cls, samples, sample_rate=None) -> "AccelTrace":
        """Build a trace from TriAxialSample-like rows, checking uniform spacing.

        If ``sample_rate`` is omitted it is inferred from the timestamps.
        """
        rows = np.asarray([tuple(s) for s in samples], dtype=float)
        if rows.ndim != 2 or rows.shape[1] != 4 or len(rows) < 2:
            raise InvalidTrace("need at least 2 samples of (t, ax, ay, az)")
        t = rows[:, 0]
        if not np.all(np.isfinite(t)) or t[0] < 0:
            raise InvalidTrace("timestamps must be finite and non-negative")
        if np.any(np.diff(t) <= 0):
            raise NonUniformSampling("timestamps must be strictly increasing")
        if sample_rate is None:
            estimate = (len(t) - 1) / (t[-1] - t[0])
            sample_rate = float(f"{estimate:.9g}")
        expected = t[0] + np.arange(len(t)) / sample_rate
        worst = float(np.max(np.abs(t - expected)))
        if worst > SPACING_TOL:
            raise NonUniformSampling(
                f"timestamps deviate from a {sample_rate} Hz grid by {worst:.3g} s"
            )
        return cls(sample_rate=float(sample_rate), xyz=rows[:, 1:], t0=float(t[0]))

    def __len__(self):
        return len(self.xyz)

    def __eq__(self, other):
        if not isinstance(other, AccelTrace):
            return NotImplemented
        return (
            self.sample_rate == other.sample_rate
            and self.t0 == other.t0
            and np.array_equal(self.xyz, other.xyz)
        )

    __hash__ = None

    @property
    def timestamps(self) -> np.ndarray:
        return self.t0 + np.arange(len(self.xyz)) / self.sample_rate

    @property
    def samples(self) -> tuple:
        return tuple(
            TriAxialSample(float(t), *map(float, row))
            for t, row in zip(self.timestamps, self.xyz)
        )


def write_trace_csv(trace: AccelTrace, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for t, (ax, ay, az) in zip(trace.timestamps, trace.xyz):
            # repr() round-trips floats exactly
            writer.writerow([repr(float(t)), repr(float(ax)), repr(float(ay)), repr(float(az))])


def load_trace_csv(path) -> AccelTrace:
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise EmptyFile(f"{path}: file is empty")
        if tuple(h.strip() for h in header) != CSV_HEADER:
            raise MalformedRow(f"{path}: expected header {','.join(CSV_HEADER)}, got {header}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not f.strip() for f in row):
                continue
            if len(row) != 4:
                raise MalformedRow(f"{path}:{lineno}: expected 4 fields, got {len(row)}")
            try:
                values = tuple(float(f) for f in row)
            except ValueError:
                raise MalformedRow(f"{path}:{lineno}: non-numeric field in {row}") from None
            if not all(math.isfinite(v) for v in values):
                raise MalformedRow(f"{path}:{lineno}: non-finite value in {row}")
            rows.append(values)
    if not rows:
        raise EmptyFile(f"{path}: no data rows")
    return AccelTrace.from_samples(rows)


@dataclass(frozen=True)
class SynthConfig:
    duration: float = 5.0
    sample_rate: float = 100.0
    base_freq_range: tuple = (2.0, 5.0)
    amp_range: tuple = (5.0, 15.0)
    device_noise_std: float = 0.5
    device_gain_jitter: float = 0.05
    sync_offset_max: int = 3
    bump_amplitude: float = 40.0

    def __post_init__(self):
        scalars = {
            "duration": self.duration,
            "sample_rate": self.sample_rate,
            "device_noise_std": self.device_noise_std,
            "device_gain_jitter": self.device_gain_jitter,
            "bump_amplitude": self.bump_amplitude,
        }
        for name, value in scalars.items():
            if not math.isfinite(value) or value < 0:
                raise InvalidConfig(f"{name} must be finite and non-negative, got {value}")
        if self.duration <= 0 or self.sample_rate <= 0:
            raise InvalidConfig("duration and sample_rate must be positive")
        if self.device_gain_jitter >= 1:
            raise InvalidConfig("device_gain_jitter must be below 1")
        if int(self.sync_offset_max) != self.sync_offset_max or self.sync_offset_max < 0:
            raise InvalidConfig("sync_offset_max must be a non-negative integer")
        for name in ("base_freq_range", "amp_range"):
            lo, hi = getattr(self, name)
            if not (math.isfinite(lo) and math.isfinite(hi)) or lo < 0 or hi < lo:
                raise InvalidConfig(f"{name} must be a non-empty non-negative interval")
            object.__setattr__(self, name, (float(lo), float(hi)))
        object.__setattr__(self, "sync_offset_max", int(self.sync_offset_max))

    @property
    def motion_samples(self) -> int:
        return int(round(self.duration * self.sample_rate))

    @property
    def trace_samples(self) -> int:
        return (
            LEAD_SAMPLES + len(BUMP_SHAPE) + self.motion_samples
            + self.sync_offset_max + SETTLE_PAD
        )


@dataclass(frozen=True)
class _Latent:
    """Noise-free shared motion, including lead-in and bump, as an (L, 3) array."""

    xyz: np.ndarray = field(repr=False)


def _draw_latent(config: SynthConfig, rng: np.random.Generator) -> _Latent:
    fs = config.sample_rate
    n_motion = config.trace_samples - LEAD_SAMPLES - len(BUMP_SHAPE)
    t = np.arange(n_motion) / fs

    f_lo, f_hi = config.base_freq_range
    f0 = rng.uniform(f_lo, f_hi)
    drift = 0.1 * f0 * np.sin(2 * np.pi * t / config.duration + rng.uniform(0, 2 * np.pi))
    freq = np.clip(f0 + drift, f_lo, f_hi)
    phase = 2 * np.pi * np.cumsum(freq) / fs + rng.uniform(0, 2 * np.pi)

    a0 = rng.uniform(*config.amp_range)
    mod_freq = rng.uniform(0.2, 0.6)
    envelope = a0 * (1 + 0.25 * np.sin(2 * np.pi * mod_freq * t + rng.uniform(0, 2 * np.pi)))

    # dominant shake axis plus a weak orthogonal wobble
    main_axis = rng.normal(size=3)
    main_axis /= np.linalg.norm(main_axis)
    side_axis = np.cross(main_axis, rng.normal(size=3))
    side_axis /= np.linalg.norm(side_axis)
    wobble = 0.15 * envelope * np.sin(2 * phase + rng.uniform(0, 2 * np.pi))
    motion = np.outer(envelope * np.sin(phase), main_axis) + np.outer(wobble, side_axis)

    bump_axis = rng.normal(size=3)
    bump_axis /= np.linalg.norm(bump_axis)
    bump = np.outer(config.bump_amplitude * BUMP_SHAPE, bump_axis)
    lead = np.zeros((LEAD_SAMPLES, 3))
    return _Latent(np.vstack([lead, bump, motion]))


def _render(latent: _Latent, config: SynthConfig, rng: np.random.Generator) -> AccelTrace:
    jitter = config.device_gain_jitter
    gain = rng.uniform(1 - jitter, 1 + jitter)
    shift = int(rng.integers(0, config.sync_offset_max + 1))
    n = config.trace_samples
    xyz = np.zeros((n, 3))
    xyz[shift:] = gain * latent.xyz[: n - shift]
    if config.device_noise_std > 0:
        xyz += rng.normal(0.0, config.device_noise_std, size=xyz.shape)
    return AccelTrace(sample_rate=config.sample_rate, xyz=xyz)


def synth_shared_pair(config: SynthConfig, seed: int) -> tuple:
    """Two devices shaken together: one latent motion, two device renderings."""
    if not isinstance(config, SynthConfig):
        raise InvalidConfig("config must be a SynthConfig")
    rng = np.random.default_rng(seed)
    latent = _draw_latent(config, rng)
    return _render(latent, config, rng), _render(latent, config, rng)


def synth_independent_pair(config: SynthConfig, seed: int) -> tuple:
    """Two devices shaken separately: independent latent motions."""
    if not isinstance(config, SynthConfig):
        raise InvalidConfig("config must be a SynthConfig")
    rng = np.random.default_rng(seed)
    first, second = _draw_latent(config, rng), _draw_latent(config, rng)
    return _render(first, config, rng), _render(second, config, rng)


def subject_config(config: SynthConfig, rng: np.random.Generator) -> SynthConfig:
    """Narrow a config to one person's shaking style.

    Each subject gets a preferred frequency (+-0.5 Hz) and amplitude (+-2 m/s^2)
    inside the population ranges.
    """
    f_lo, f_hi = config.base_freq_range
    a_lo, a_hi = config.amp_range
    f_c = rng.uniform(f_lo, f_hi)
    a_c = rng.uniform(a_lo, a_hi)
    return SynthConfig(
        duration=config.duration,
        sample_rate=config.sample_rate,
        base_freq_range=(max(f_lo, f_c - 0.5), min(f_hi, f_c + 0.5)),
        amp_range=(max(a_lo, a_c - 2.0), min(a_hi, a_c + 2.0)),
        device_noise_std=config.device_noise_std,
        device_gain_jitter=config.device_gain_jitter,
        sync_offset_max=config.sync_offset_max,
        bump_amplitude=config.bump_amplitude,
    )


def synth_subject_shakes(config: SynthConfig, n_subjects: int, n_shakes: int, seed: int) -> dict:
    """Recorded-dataset stand-in: ``{(subject, shake): (dev1, dev2)}``, 1-based ids."""
    if n_subjects < 1 or n_shakes < 1:
        raise InvalidConfig("need at least one subject and one shake")
    root = np.random.SeedSequence(seed)
    out = {}
    for subject, child in enumerate(root.spawn(n_subjects), start=1):
        style_seed, *shake_seeds = child.spawn(n_shakes + 1)
        style = subject_config(config, np.random.default_rng(style_seed))
        for shake, ss in enumerate(shake_seeds, start=1):
            out[(subject, shake)] = synth_shared_pair(style, int(ss.generate_state(1)[0]))
    return out
