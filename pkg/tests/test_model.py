import numpy as np
import pytest
from hypothesis import given, strategies as st

from tvsbl.errors import ConfigurationError
from tvsbl.model import (GAMMA_FLOOR, Problem, compute_s, marginal_objective,
                         marginal_objective_woodbury, oracle_mmse, posterior_update)

from conftest import crandn


def random_problem(rng, L, N, M, sigma2=0.3):
    return Problem(crandn(rng, L, N), crandn(rng, L, M), sigma2)


def dense_posterior(problem, gamma):
    """Posterior straight from the textbook formula with an explicit inverse."""
    A, Y, s2 = problem.A, problem.Y, problem.sigma2
    Sigma = np.linalg.inv(A.conj().T @ A / s2 + np.diag(1.0 / gamma))
    return Sigma, Sigma @ A.conj().T @ Y / s2


def dense_objective(problem, gamma):
    A, Y = problem.A, problem.Y
    Sy = problem.sigma2 * np.eye(problem.L) + A @ np.diag(gamma) @ A.conj().T
    logdet = np.log(np.real(np.linalg.det(Sy)))
    return problem.M * logdet + np.real(np.trace(Y.conj().T @ np.linalg.inv(Sy) @ Y))


def test_problem_validation():
    with pytest.raises(ConfigurationError):
        Problem(np.ones((3, 4)), np.ones((2, 1)), 1.0)
    with pytest.raises(ConfigurationError):
        Problem(np.ones((3, 4)), np.ones((3, 1)), 0.0)
    with pytest.raises(ConfigurationError):
        Problem(np.full((3, 4), np.nan), np.ones((3, 1)), 1.0)
    p = Problem(np.ones((3, 4)), np.ones(3), 1.0)
    assert (p.L, p.N, p.M) == (3, 4, 1)


def test_identity_posterior(rng):
    y = crandn(rng, 3, 1)
    post = posterior_update(Problem(np.eye(3), y, 1.0), np.ones(3))
    np.testing.assert_allclose(post.Sigma, 0.5 * np.eye(3), atol=1e-15)
    np.testing.assert_allclose(post.mu, 0.5 * y, atol=1e-15)


def test_floored_gamma_pins_entry(rng):
    p = random_problem(rng, 4, 6, 2)
    gamma = np.ones(6)
    gamma[2] = GAMMA_FLOOR
    post = posterior_update(p, gamma)
    assert np.all(np.abs(post.mu[2]) <= 1e-8)


def test_posterior_matches_dense_inverse(rng):
    p = random_problem(rng, 4, 6, 2)
    gamma = rng.uniform(0.1, 2.0, 6)
    post = posterior_update(p, gamma)
    Sigma, mu = dense_posterior(p, gamma)
    assert np.max(np.abs(post.Sigma - Sigma)) <= 1e-10 * np.max(np.abs(Sigma))
    assert np.max(np.abs(post.mu - mu)) <= 1e-10 * np.max(np.abs(mu))


@given(st.integers(1, 8), st.integers(1, 12), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_posterior_invariants(L, N, M, seed):
    rng = np.random.default_rng(seed)
    p = random_problem(rng, L, N, M)
    gamma = np.exp(rng.uniform(-5, 2, N))
    post = posterior_update(p, gamma)
    S = post.Sigma
    assert np.max(np.abs(S - S.conj().T)) <= 1e-10 * np.max(np.abs(S))
    d = np.real(np.diag(S))
    assert np.all(d > 0)
    assert np.all(d <= gamma.max() * (1 + 1e-12))
    assert np.all(post.s >= d)


def test_compute_s_examples():
    Sigma = np.diag([0.2, 0.1])
    mu = np.array([[np.sqrt(0.3)], [0.0]])
    np.testing.assert_allclose(compute_s(mu, Sigma, 1), [0.5, 0.1])
    mu2 = np.array([[1 + 0j, 1j], [0, 0]])
    assert compute_s(mu2, np.diag([0.1, 0.4]), 2)[0] == pytest.approx(1.1)
    np.testing.assert_array_equal(compute_s(np.zeros((2, 3)), Sigma, 3), [0.2, 0.1])


@given(st.integers(0, 2**32 - 1))
def test_compute_s_permutation_equivariant(seed):
    rng = np.random.default_rng(seed)
    N, M = 7, 3
    mu = crandn(rng, N, M)
    B = crandn(rng, N, N)
    Sigma = B @ B.conj().T
    perm = rng.permutation(N)
    s = compute_s(mu, Sigma, M)
    sp = compute_s(mu[perm], Sigma[np.ix_(perm, perm)], M)
    np.testing.assert_allclose(sp, s[perm], rtol=1e-14)


def test_objective_with_floored_gamma(rng):
    p = random_problem(rng, 5, 7, 3)
    expected = p.M * p.L * np.log(p.sigma2) + np.sum(np.abs(p.Y) ** 2) / p.sigma2
    assert marginal_objective(p, np.zeros(7)) == pytest.approx(expected, rel=1e-8)


def test_objective_scaling_of_trace_term(rng):
    p = random_problem(rng, 4, 6, 2)
    gamma = rng.uniform(0.1, 2.0, 6)
    c = 1.7 - 0.4j
    logdet_part = marginal_objective(Problem(p.A, 0 * p.Y, p.sigma2), gamma)
    base = marginal_objective(p, gamma) - logdet_part
    scaled = marginal_objective(Problem(p.A, c * p.Y, p.sigma2), gamma) - logdet_part
    assert scaled == pytest.approx(abs(c) ** 2 * base, rel=1e-10)


def test_objective_matches_dense(rng):
    p = random_problem(rng, 4, 6, 2)
    gamma = rng.uniform(0.1, 2.0, 6)
    assert marginal_objective(p, gamma) == pytest.approx(dense_objective(p, gamma), rel=1e-10)


@given(st.integers(1, 8), st.integers(1, 12), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_objective_woodbury_path_agrees(L, N, M, seed):
    rng = np.random.default_rng(seed)
    p = random_problem(rng, L, N, M)
    gamma = np.exp(rng.uniform(-3, 2, N))
    a, b = marginal_objective(p, gamma), marginal_objective_woodbury(p, gamma)
    assert abs(a - b) <= 1e-8 * max(abs(a), 1.0)


def test_oracle_full_support_equals_posterior(rng):
    p = random_problem(rng, 4, 6, 2)
    gamma = rng.uniform(0.1, 2.0, 6)
    X = oracle_mmse(p, range(6), gamma)
    np.testing.assert_array_equal(X, posterior_update(p, gamma).mu)


def test_oracle_least_squares_limit(rng):
    Q, _ = np.linalg.qr(crandn(rng, 5, 5))
    Y = crandn(rng, 5, 2)
    X = oracle_mmse(Problem(Q, Y, 1e-12), range(5), np.full(5, 1e12))
    np.testing.assert_allclose(X, Q.conj().T @ Y, atol=1e-8)


def test_oracle_zero_off_support(rng):
    p = random_problem(rng, 8, 12, 2)
    X = oracle_mmse(p, {1, 5, 9}, np.ones(3))
    off = np.setdiff1d(np.arange(12), [1, 5, 9])
    assert np.all(X[off] == 0)
    with pytest.raises(ConfigurationError):
        oracle_mmse(p, set(), [])
