import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kql.dimension import (
    KernelDescriptor,
    TheoryParams,
    c_lambda_bound,
    check_bound_domination,
    check_dual_identity,
    check_monotonicity,
    check_pseudo_vs_effective,
    check_sum_of_ucb,
    covering_granularities,
    d_lambda_bound,
    effective_dimension,
    effective_dimension_dual_identity,
    log_covering_h,
    log_covering_hs,
    pseudo_dimension,
    regret_bound,
    sum_of_ucb,
    theoretical_beta,
)
from kql.errors import InvalidArgument, InvalidInput, OutOfDomain


def gaussian_gram(rng, n, d=2, eta=1.0):
    X = rng.uniform(-1, 1, size=(n, d)) / math.sqrt(d)
    sq = np.sum((X[:, None] - X[None]) ** 2, axis=2)
    return np.exp(-eta * sq)


def test_effective_dimension_examples():
    assert effective_dimension(np.zeros((0, 0)), 1.0) == 0.0
    assert effective_dimension(np.ones((1, 1)), 1.0) == pytest.approx(0.5)
    assert effective_dimension(np.ones((3, 3)), 1.0) == pytest.approx(0.75)


def test_effective_dimension_rejects_non_psd():
    with pytest.raises(InvalidInput):
        effective_dimension(np.array([[1.0, 2.0], [2.0, 1.0]]), 1.0)


def test_pseudo_dimension_examples():
    assert pseudo_dimension(np.zeros((0, 0)), 1.0) == 0.0
    assert pseudo_dimension(np.ones((1, 1)), 1.0) == pytest.approx(math.log(2))


def test_dual_identity_examples():
    assert effective_dimension_dual_identity(np.ones((1, 1)), 1.0) == pytest.approx(0.5)
    assert effective_dimension_dual_identity(np.zeros((0, 0)), 1.0) == 0.0


@pytest.mark.parametrize("lam", [1e-4, 1e-2, 1.0, 10.0])
def test_dual_identity_random(lam):
    rng = np.random.default_rng(int(lam * 1e4) + 1)
    for _ in range(25):
        G = gaussian_gram(rng, 20, eta=rng.uniform(0.1, 3))
        assert check_dual_identity(G, lam)


@settings(max_examples=100, deadline=None)
@given(
    n=st.integers(1, 50),
    lam=st.sampled_from([1e-4, 1e-2, 1.0, 10.0]),
    eta=st.floats(0.0, 5.0),
    seed=st.integers(0, 2**32 - 1),
)
def test_pseudo_vs_effective(n, lam, eta, seed):
    G = gaussian_gram(np.random.default_rng(seed), n, eta=eta)
    res = check_pseudo_vs_effective(G, lam)
    assert res, res.line()


def test_monotonicity_random_and_duplicates():
    rng = np.random.default_rng(11)
    for i in range(100):
        G = gaussian_gram(rng, 30, eta=rng.uniform(0, 3))
        assert all(check_monotonicity(G, [1e-4, 1e-2, 1.0, 10.0][i % 4]))
    G = np.ones((10, 10))
    assert all(check_monotonicity(G, 1e-2))


def test_monotonicity_single_point():
    results = check_monotonicity(np.ones((1, 1)), 1.0)
    assert [r.name for r in results] == ["deff_monotone", "dpse_monotone"]
    assert all(r.passed and r.detail == "" for r in results)


def test_sum_of_ucb_scalar_case():
    lam = 0.1
    for k in (0.25, 0.5, 1.0):
        lhs, rhs = sum_of_ucb(np.array([[k]]), lam, 0.0)
        assert lhs == pytest.approx(k / lam)
        assert rhs == pytest.approx((1 / lam) / math.log1p(1 / lam) * math.log1p(k / lam))
        assert lhs <= rhs


def test_sum_of_ucb_brute_force_lhs():
    """Double sum via explicit inverses of each prefix (independent of the Cholesky path)."""
    rng = np.random.default_rng(2)
    G = gaussian_gram(rng, 6, eta=0.5)
    lam, gamma = 0.3, 0.7
    n = len(G)
    expected = 0.0
    for i in range(n):
        for tau in range(i + 1):
            m = tau  # prefix x_1..x_{tau-1} in 1-based indexing
            if m == 0:
                w2 = G[i, i] / lam
            else:
                g = G[:m, i]
                w2 = (G[i, i] - g @ np.linalg.inv(G[:m, :m] + lam * np.eye(m)) @ g) / lam
            expected += gamma ** (i - tau) * w2
    lhs, _ = sum_of_ucb(G, lam, gamma)
    assert lhs == pytest.approx(expected, rel=1e-10)


@pytest.mark.parametrize("gamma", [0.0, 0.5, 0.95])
def test_sum_of_ucb_random(gamma):
    rng = np.random.default_rng(int(gamma * 100))
    for i in range(50):
        G = gaussian_gram(rng, 30, eta=rng.uniform(0, 3))
        res = check_sum_of_ucb(G, [1e-4, 1e-2, 1.0, 10.0][i % 4], gamma)
        assert res, res.line()


def test_d_lambda_bound_examples():
    assert d_lambda_bound(KernelDescriptor("linear", 5), 100, 1.0) == 5
    assert d_lambda_bound(KernelDescriptor("gaussian", 1, 0.0), math.e, 1.0) == pytest.approx(27.0)
    with pytest.raises(OutOfDomain):
        d_lambda_bound(KernelDescriptor("gaussian", 1, 0.0), 3, 5.0)


def test_bounds_dominate_measured():
    rng = np.random.default_rng(9)
    for i in range(50):
        d = int(rng.integers(1, 4))
        n = int(rng.integers(5, 40))
        X = rng.normal(size=(n, d))
        X /= np.maximum(np.linalg.norm(X, axis=1, keepdims=True), 1.0)
        eta = rng.uniform(0, 3)
        lam = [1e-4, 1e-2, 1.0][i % 3]
        assert check_bound_domination(KernelDescriptor("linear", d), X @ X.T, lam)
        sq = np.sum((X[:, None] - X[None]) ** 2, axis=2)
        assert check_bound_domination(KernelDescriptor("gaussian", d, eta), np.exp(-eta * sq), lam)


def test_covering_linear_example():
    k = KernelDescriptor("linear", 1)
    assert log_covering_h(k, 2.0) + log_covering_hs(k, 2.0) == pytest.approx(2 * math.log(2))
    assert log_covering_h(k, 2.0) + log_covering_hs(k, 2.0) == pytest.approx(1.3863, abs=1e-4)


def test_c_lambda_gaussian_hand_value():
    T, lam, gamma = 10, 1.0, 0.5
    eps_h, eps_hs = covering_granularities(T, lam, gamma)
    assert eps_h == pytest.approx(0.5 / 400)
    assert eps_hs == pytest.approx(0.5 / (32 * 11**3))
    # ceil(2 ln 1600) = 15 and ceil(2 ln(2 sqrt(2) / eps_hs)) = 25
    expected = 15 * math.log(1 + 3200) + 25**2 * math.log(1 + 4 / eps_hs)
    assert c_lambda_bound(KernelDescriptor("gaussian", 1, 0.0), T, lam, gamma) == pytest.approx(expected)
    assert 0 < expected < math.inf


@pytest.mark.parametrize("kernel", [KernelDescriptor("linear", 3), KernelDescriptor("gaussian", 2, 0.5)])
def test_c_lambda_decreases_with_lambda(kernel):
    values = [c_lambda_bound(kernel, 100, lam, 0.9) for lam in (1e-3, 1e-2, 1e-1, 1.0, 10.0)]
    assert all(a >= b for a, b in zip(values, values[1:]))


def test_theoretical_beta_examples():
    p = TheoryParams(T=1000, gamma=0.95, lam=1e-4, d_lambda=5, rho=1.0)
    assert theoretical_beta(p) == pytest.approx(0.6)
    big = TheoryParams(T=10, gamma=0.5, lam=1e4, d_lambda=1, rho=1.0)
    assert theoretical_beta(big) == pytest.approx(2 * math.sqrt(10 + 1e4) / 0.5)
    noisy = TheoryParams(T=100, gamma=0.9, lam=0.5, d_lambda=30, c_lambda=1e6, rho=5, epsilon=1, sigma=1)
    assert theoretical_beta(noisy) <= 2 * math.sqrt(100.5) / 0.1 + 1e-12


def test_theory_params_validation():
    with pytest.raises(InvalidArgument):
        TheoryParams(T=10, gamma=0.9, lam=1.0, d_lambda=1, rho=0.05)
    with pytest.raises(InvalidArgument):
        TheoryParams(T=10, gamma=0.9, lam=1.0, d_lambda=0.5)
    with pytest.raises(InvalidArgument):
        TheoryParams(T=10, gamma=0.9, lam=1.0, d_lambda=1, sigma=2)


def test_regret_bound_scaling():
    base = dict(gamma=0.95, lam=1e-3, d_lambda=10, rho=1.0)
    r1 = regret_bound(TheoryParams(T=1000, **base))
    r4 = regret_bound(TheoryParams(T=4000, **base))
    assert 2 * 0.9 <= r4 / r1 <= 2 * 1.3
    g1 = regret_bound(TheoryParams(T=1000, gamma=0.9, lam=1e-3, d_lambda=10))
    g2 = regret_bound(TheoryParams(T=1000, gamma=0.99, lam=1e-3, d_lambda=10))
    assert g2 / g1 == pytest.approx(10**2.5)


def test_regret_bound_epsilon_term_linear_in_T():
    def eps_part(T):
        with_eps = regret_bound(TheoryParams(T=T, gamma=0.9, lam=1.0, d_lambda=3, rho=1.0, epsilon=0.1))
        without = regret_bound(TheoryParams(T=T, gamma=0.9, lam=1.0, d_lambda=3, rho=1.0))
        lead = math.sqrt(T * 3 * math.log(math.e * (T + 1)) / (math.log(2) * 0.1**5))
        return (with_eps - without), lead * 0.1 * math.sqrt(3 * T)

    got, expected = eps_part(500)
    assert got == pytest.approx(expected)


def test_regret_bound_corollary_mode():
    p = TheoryParams(T=100, gamma=0.9, lam=0.1, d_lambda=4, rho=1.0, sigma=0.5, p=0.1)
    lead = math.sqrt(100 * 4 * math.log(math.e * 100.1 / 0.1) / (math.log1p(10) * 0.1**5))
    noise = 0.5 * 4 * math.sqrt(math.log(math.e * 100.1 / (0.1 * 0.1)) / 0.1)
    assert regret_bound(p, corollary=True) == pytest.approx(lead * (1 + noise))
