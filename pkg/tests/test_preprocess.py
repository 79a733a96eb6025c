import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import oracles
from shakekey.errors import InsufficientSamples, InvalidKernelSize, NoBumpDetected
from shakekey.preprocess import NormSignal, box_filter, detect_bump, euclidean_norm, preprocess, trim_after_bump
from shakekey.signal import AccelTrace, SynthConfig, synth_shared_pair

values = arrays(float, st.integers(2, 80), elements=st.floats(0, 1e3, allow_nan=False))


def sig(x, rate=100.0):
    return NormSignal(rate, x)


def test_norm_triangle_and_zero():
    tr = AccelTrace(100.0, [[3, 4, 0], [0, 0, 0]])
    assert euclidean_norm(tr).values.tolist() == [5.0, 0.0]


def test_norm_matches_oracle():
    rng = np.random.default_rng(0)
    xyz = rng.normal(0, 10, size=(500, 3))
    got = euclidean_norm(AccelTrace(100.0, xyz)).values
    np.testing.assert_allclose(got, oracles.norm(xyz.tolist()), rtol=1e-15)


def test_detect_bump():
    assert detect_bump(sig([1, 2, 50, 3]), 40) == 2
    with pytest.raises(NoBumpDetected):
        detect_bump(sig([1, 2, 3]), 40)
    with pytest.raises(ValueError):
        detect_bump(sig([1, 2, 3]), 0)


@given(values, st.floats(0.1, 500), st.floats(0.1, 500))
def test_detect_bump_monotone_in_threshold(x, t1, t2):
    lo, hi = sorted((t1, t2))
    s = sig(x)
    try:
        i_hi = detect_bump(s, hi)
    except NoBumpDetected:
        return
    assert detect_bump(s, lo) <= i_hi


def test_bump_indices_within_sync_offset():
    cfg = SynthConfig()
    for seed in range(100):
        a, b = synth_shared_pair(cfg, seed)
        ia, ib = detect_bump(euclidean_norm(a), 30), detect_bump(euclidean_norm(b), 30)
        assert abs(ia - ib) <= cfg.sync_offset_max


def test_trim_indices():
    s = sig(np.arange(600, dtype=float))
    out = trim_after_bump(s, 50, 10, 500)
    assert out.values[0] == 60 and out.values[-1] == 559 and len(out) == 500
    with pytest.raises(InsufficientSamples):
        trim_after_bump(sig(np.arange(100, dtype=float)), 50, 10, 500)


def _xcorr_lag(x, y, max_lag=10):
    x = x - x.mean()
    y = y - y.mean()
    best, best_lag = -np.inf, 0
    for lag in range(-max_lag, max_lag + 1):
        total = sum(x[i] * y[i + lag] for i in range(max(0, -lag), min(len(x), len(y) - lag)))
        if total > best:
            best, best_lag = total, lag
    return best_lag


def test_trimmed_shared_signals_are_aligned():
    cfg = SynthConfig()
    for seed in range(20):
        a, b = synth_shared_pair(cfg, seed)
        ta, tb = (preprocess(t, kernel_size=1) for t in (a, b))
        assert abs(_xcorr_lag(ta.values, tb.values)) <= cfg.sync_offset_max


def test_box_filter_identity_and_constant():
    x = sig([1.0, 4.0, 2.0, 8.0])
    assert box_filter(x, 1) == x
    const = sig(np.full(50, 3.25))
    for k in (2, 3, 7, 50, 51):
        np.testing.assert_allclose(box_filter(const, k).values, 3.25, rtol=1e-15)


def test_box_filter_rejects_bad_kernel():
    for k in (0, -1, 2.5):
        with pytest.raises(InvalidKernelSize):
            box_filter(sig([1.0, 2.0]), k)


def test_box_filter_kernel_25_matches_oracle():
    x = np.random.default_rng(1).uniform(0, 30, 500)
    got = box_filter(sig(x), 25).values
    np.testing.assert_allclose(got, oracles.box_filter(x.tolist(), 25), rtol=1e-12)


def test_box_filter_even_kernel_centering():
    # k=4: window covers 1 sample left, 2 right
    x = sig([0.0, 0.0, 0.0, 12.0, 0.0, 0.0, 0.0])
    assert box_filter(x, 4).values.tolist() == [0.0, 3.0, 3.0, 3.0, 3.0, 0.0, 0.0]


@given(values, st.integers(1, 100))
def test_box_filter_keeps_bounds(x, k):
    out = box_filter(sig(x), k).values
    assert len(out) == len(x)
    assert np.all(out >= x.min()) and np.all(out <= x.max())


@settings(max_examples=50)
@given(values, st.integers(1, 20))
def test_box_filter_oracle_property(x, k):
    np.testing.assert_allclose(box_filter(sig(x), k).values, oracles.box_filter(x.tolist(), k),
                               rtol=1e-9, atol=1e-9)
