import math

import numpy as np
import pytest

import oracles
from shakekey.entropy import (
    EPS,
    BernoulliMixture,
    as_bit_matrix,
    bic,
    bic_sweep,
    binary_entropy_sum,
    em_fit,
    estimate_entropy,
    log_likelihood,
    select_model,
)
from shakekey.errors import InsufficientData, LengthMismatch
from shakekey.keygen import Key


def two_component_corpus(seed, n=500, d=40):
    rng = np.random.default_rng(seed)
    z = rng.random(n) < 0.5
    p = np.where(z[:, None], 0.95, 0.05)
    return (rng.random((n, d)) < p).astype(float), z


def test_as_bit_matrix_inputs():
    x = as_bit_matrix([Key("01" * 20, 4), "10" * 20, [1, 0] * 20])
    assert x.shape == (3, 40)
    with pytest.raises(LengthMismatch):
        as_bit_matrix(["01", "011"])
    with pytest.raises(InsufficientData):
        as_bit_matrix([])


def test_uniform_single_component_likelihood():
    m = BernoulliMixture([1.0], np.full((1, 40), 0.5))
    assert log_likelihood(m, ["0110" * 10]) == pytest.approx(40 * math.log(0.5), rel=1e-12)


def test_near_deterministic_likelihood():
    key = "1100" * 10
    probs = np.array([[1 - EPS if c == "1" else EPS for c in key]])
    m = BernoulliMixture([1.0], probs)
    assert log_likelihood(m, [key]) == pytest.approx(40 * math.log(1 - EPS), rel=1e-9)


def test_likelihood_matches_product_oracle():
    rng = np.random.default_rng(4)
    for _ in range(50):
        k, d = rng.integers(1, 5), rng.integers(1, 21)
        w = rng.dirichlet(np.ones(k))
        p = rng.uniform(0.01, 0.99, (k, d))
        x = (rng.random((6, d)) < 0.5).astype(int)
        expected = sum(math.log(oracles.mixture_likelihood(w, p, row)) for row in x)
        assert log_likelihood(BernoulliMixture(w, p), x.tolist()) == pytest.approx(expected, rel=1e-6)


def test_likelihood_length_mismatch():
    m = BernoulliMixture([1.0], np.full((1, 4), 0.5))
    with pytest.raises(LengthMismatch):
        log_likelihood(m, ["01010"])


def test_mixture_validation():
    with pytest.raises(ValueError):
        BernoulliMixture([0.5, 0.6], np.full((2, 3), 0.5))
    with pytest.raises(ValueError):
        BernoulliMixture([1.0], np.zeros((1, 3)))


def test_single_component_is_closed_form():
    rng = np.random.default_rng(0)
    x = (rng.random((200, 40)) < rng.uniform(0, 1, 40)).astype(float)
    x[:, 0] = 1  # a constant bit is clamped to 1 - EPS
    m = em_fit(x, 1, seed=1)
    np.testing.assert_allclose(m.probs[0], np.clip(x.mean(axis=0), EPS, 1 - EPS), rtol=1e-12)
    assert m.weights.tolist() == [1.0]
    # the first update reaches the optimum; later ones change nothing
    assert m.log_likelihoods[1] == m.log_likelihoods[-1]


def test_em_insufficient_data():
    with pytest.raises(InsufficientData):
        em_fit(["0101", "1100"], 3)


def test_em_monotone_and_valid():
    rng = np.random.default_rng(9)
    for _ in range(20):
        x = (rng.random((rng.integers(20, 120), 16)) < rng.uniform(0.1, 0.9, 16)).astype(float)
        m = em_fit(x, int(rng.integers(2, 5)), seed=int(rng.integers(1 << 30)))
        assert np.all(np.diff(m.log_likelihoods) >= -1e-9)
        assert abs(m.weights.sum() - 1) < 1e-9
        assert m.probs.min() >= EPS and m.probs.max() <= 1 - EPS


def test_em_deterministic():
    x, _ = two_component_corpus(3, n=100)
    a, b = em_fit(x, 3, seed=8), em_fit(x, 3, seed=8)
    assert np.array_equal(a.probs, b.probs) and np.array_equal(a.weights, b.weights)


def test_em_recovers_two_components():
    x, z = two_component_corpus(2015)
    m = em_fit(x, 2, seed=0)
    order = np.argsort(m.probs.mean(axis=1))
    assert np.abs(m.probs[order[0]] - 0.05).max() <= 0.05
    assert np.abs(m.probs[order[1]] - 0.95).max() <= 0.05
    # well separated: EM lands on the labelled per-group bit means
    np.testing.assert_allclose(m.probs[order], np.vstack([x[~z].mean(0), x[z].mean(0)]), atol=1e-6)


def test_bic_hand_arithmetic():
    m = BernoulliMixture([1.0], [[1 - EPS]])
    expected = 2 * math.log(1 - EPS) - 0.5 * math.log(2)
    assert bic(m, ["1", "1"]) == pytest.approx(expected, rel=1e-12)


def test_duplicate_component_never_raises_bic():
    x, _ = two_component_corpus(1, n=200)
    m = em_fit(x, 2, seed=0)
    w, p = m.weights, m.probs
    split = BernoulliMixture([w[0] / 2, w[0] / 2, w[1]], np.vstack([p[0], p[0], p[1]]))
    assert log_likelihood(split, x) == pytest.approx(log_likelihood(m, x), rel=1e-12)
    assert bic(split, x) < bic(m, x)


def test_select_model_small_cases():
    x = (np.random.default_rng(0).random((50, 8)) < 0.3).astype(float)
    only = select_model(x, k_max=1, seed=0)
    np.testing.assert_allclose(only.probs[0], np.clip(x.mean(0), EPS, 1 - EPS))
    constant = ["1010" * 10] * 30
    assert select_model(constant, k_max=4, restarts=2, seed=0).n_components == 1


def test_select_two_components():
    x, _ = two_component_corpus(77)
    res = bic_sweep(x, k_max=4, restarts=3, seed=77)
    assert res.k == 2
    assert set(res.bic_table) == {1, 2, 3, 4}


def test_entropy_uniform_is_full_length():
    m = BernoulliMixture([1.0], np.full((1, 40), 0.5))
    est = estimate_entropy(m, 10_000, seed=0)
    assert est.bits == pytest.approx(40.0, abs=1e-9)
    assert est.stderr < 1e-9


def test_entropy_deterministic_is_zero():
    m = BernoulliMixture([1.0], np.full((1, 40), EPS))
    est = estimate_entropy(m, 100_000, seed=0)
    exact = 40 * oracles.binary_entropy(EPS)  # about 8.5e-4 bits
    assert est.bits == pytest.approx(0.0, abs=1e-2)
    assert abs(est.bits - exact) <= 3 * est.stderr + 40 * math.log2(1 / (1 - EPS))


def test_entropy_matches_analytic_for_independent_bits():
    rng = np.random.default_rng(12)
    p = rng.uniform(0.02, 0.98, 40)
    m = BernoulliMixture([1.0], p[None, :])
    est = estimate_entropy(m, 100_000, seed=3)
    exact = sum(oracles.binary_entropy(v) for v in p)
    assert exact == pytest.approx(binary_entropy_sum(p), rel=1e-12)
    assert abs(est.bits - exact) < 3 * est.stderr


def test_entropy_bounded_for_mixtures():
    rng = np.random.default_rng(5)
    for _ in range(10):
        k = int(rng.integers(1, 6))
        m = BernoulliMixture(rng.dirichlet(np.ones(k)), rng.uniform(EPS, 1 - EPS, (k, 40)))
        est = estimate_entropy(m, 5_000, seed=1)
        assert 0 <= est.bits <= 40 + 3 * est.stderr
