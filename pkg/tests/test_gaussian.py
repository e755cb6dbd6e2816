import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from revamp.errors import InvalidParameterError, SingularUpdateError
from revamp.gaussian import (
    Gaussian1D,
    GaussianNatural1D,
    GaussianND,
    natural_combine,
    rank_one_downdate,
    reproduce,
    to_natural,
)


def random_spd(rng, n, cond=10.0):
    Q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    eig = np.exp(rng.uniform(0, math.log(cond), n))
    S = (Q * eig) @ Q.T
    return 0.5 * (S + S.T)


@pytest.mark.parametrize(
    "g, expected",
    [
        (Gaussian1D(0.0, 1.0), (0.0, 1.0)),
        (Gaussian1D(2.0, 0.5), (4.0, 2.0)),
        (Gaussian1D(1.0, -0.25), (-4.0, -4.0)),
    ],
)
def test_to_natural(g, expected):
    nat = to_natural(g)
    assert (nat.nu, nat.xi) == expected


def test_zero_variance_rejected():
    with pytest.raises(InvalidParameterError):
        Gaussian1D(1.0, 0.0)
    with pytest.raises(InvalidParameterError):
        GaussianNatural1D(1.0, 0.0).to_moment()


@pytest.mark.parametrize(
    "a, b, sign, expected",
    [
        ((0, 1), (0, 1), 1, (0, 2)),
        ((4, 2), (0, 1), -1, (4, 1)),
        ((1, 0.5), (1, 2), -1, (0, -1.5)),
    ],
)
def test_natural_combine_examples(a, b, sign, expected):
    out = natural_combine(GaussianNatural1D(*a), GaussianNatural1D(*b), sign)
    assert (out.nu, out.xi) == expected


finite = st.floats(-1e6, 1e6, allow_nan=False)


@given(finite, finite, finite, finite)
def test_natural_combine_commutes_and_inverts(n1, x1, n2, x2):
    a, b = GaussianNatural1D(n1, x1), GaussianNatural1D(n2, x2)
    assert natural_combine(a, b, 1) == natural_combine(b, a, 1)
    back = natural_combine(natural_combine(a, b, 1), b, -1)
    scale = max(1.0, abs(n1), abs(n2), abs(x1), abs(x2))
    assert back.nu == pytest.approx(a.nu, abs=1e-12 * scale)
    assert back.xi == pytest.approx(a.xi, abs=1e-12 * scale)


@given(st.floats(-50, 50), st.floats(1e-3, 1e3))
def test_natural_roundtrip(mean, var):
    g = to_natural(Gaussian1D(mean, var)).to_moment()
    assert g.mean == pytest.approx(mean, rel=1e-12, abs=1e-12)
    assert g.var == pytest.approx(var, rel=1e-12)


def test_reproduce_scalar_conjugate():
    logev, post = reproduce(GaussianND([0.0], [[1.0]]), [[1.0]], [1.0], [[1.0]])
    assert post.mean[0] == pytest.approx(0.5)
    assert post.cov[0, 0] == pytest.approx(0.5)
    assert logev == pytest.approx(stats.norm(0, math.sqrt(2)).logpdf(1.0))


def test_reproduce_uninformative_observation():
    rng = np.random.default_rng(3)
    prior = GaussianND(rng.normal(size=3), random_spd(rng, 3))
    _, post = reproduce(prior, np.eye(3), rng.normal(size=3), 1e12 * np.eye(3))
    np.testing.assert_allclose(post.mean, prior.mean, atol=1e-6)
    np.testing.assert_allclose(post.cov, prior.cov, atol=1e-6)


def joint_conditioning(m1, C1, A, m2, C2):
    """Posterior of x given z = A x + e from the explicit joint Gaussian of (x, z)."""
    Czz = A @ C1 @ A.T + C2
    Cxz = C1 @ A.T
    K = np.linalg.solve(Czz, Cxz.T).T
    mean = m1 + K @ (m2 - A @ m1)
    cov = C1 - K @ Cxz.T
    logpdf = stats.multivariate_normal(A @ m1, Czz).logpdf(m2)
    return logpdf, mean, cov


@pytest.mark.parametrize("seed", range(5))
def test_reproduce_matches_joint_conditioning(seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(3, 2))
    m1, C1 = rng.normal(size=2), random_spd(rng, 2)
    m2, C2 = rng.normal(size=3), random_spd(rng, 3)
    logev, post = reproduce(GaussianND(m1, C1), A, m2, C2)
    ref_log, ref_mean, ref_cov = joint_conditioning(m1, C1, A, m2, C2)
    assert logev == pytest.approx(ref_log, rel=1e-10)
    np.testing.assert_allclose(post.mean, ref_mean, rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(post.cov, ref_cov, rtol=1e-10, atol=1e-12)


def test_reproduce_batch_matches_loop():
    rng = np.random.default_rng(11)
    A = rng.normal(size=(4, 3))
    C1, C2 = random_spd(rng, 3), random_spd(rng, 4)
    means = rng.normal(size=(5, 3))
    m2 = rng.normal(size=4)
    logev, post = reproduce(GaussianND(means, C1), A, m2, C2)
    for i in range(5):
        lg, p = reproduce(GaussianND(means[i], C1), A, m2, C2)
        assert logev[i] == pytest.approx(lg, rel=1e-12)
        np.testing.assert_allclose(post.mean[i], p.mean, rtol=1e-12, atol=1e-14)


def test_reproduce_rejects_non_pd():
    with pytest.raises(InvalidParameterError):
        reproduce(GaussianND([0.0], [[-1.0]]), [[1.0]], [0.0], [[1.0]])
    with pytest.raises(InvalidParameterError):
        reproduce(GaussianND([0.0], [[1.0]]), [[1.0]], [0.0], [[0.0]])


@pytest.mark.parametrize(
    "mu1, s1, a, mu2, s2",
    [(0.0, 1.0, 1.0, 1.0, 1.0), (0.3, 2.0, -0.7, 1.5, 0.4), (-1.0, 0.05, 2.0, 0.2, 3.0)],
)
def test_reproduce_conserves_mass(mu1, s1, a, mu2, s2):
    logev, _ = reproduce(GaussianND([mu1], [[s1]]), [[a]], [mu2], [[s2]])

    def integrand(x):
        return stats.norm(mu1, math.sqrt(s1)).pdf(x) * stats.norm(mu2, math.sqrt(s2)).pdf(a * x)

    mass, _ = integrate.quad(integrand, -np.inf, np.inf, epsabs=0, epsrel=1e-12)
    assert mass == pytest.approx(math.exp(logev), rel=1e-6)


def recompute(P, n, d_xi):
    """Covariance after adding ``d_xi`` to the n-th diagonal of the precision ``P``."""
    P2 = P.copy()
    P2[n, n] += d_xi
    return np.linalg.inv(P2)


def test_rank_one_infinite_denominator_is_noop():
    C = np.array([[2.0, 0.3], [0.3, 1.0]])
    out = rank_one_downdate(C, 0, math.inf)
    np.testing.assert_array_equal(out, C)
    assert out is not C


def test_rank_one_zero_denominator():
    with pytest.raises(SingularUpdateError):
        rank_one_downdate(np.eye(2), 0, 0.0)


def test_rank_one_diagonal_2x2():
    # C = diag(2, 0.5); adding precision 1.5 to entry 0 gives 1/(0.5 + 1.5) = 0.5
    C = np.diag([2.0, 0.5])
    out = rank_one_downdate(C, 0, 1.0 / 1.5 + C[0, 0])
    np.testing.assert_allclose(out, np.diag([0.5, 0.5]), rtol=1e-14)
    np.testing.assert_allclose(out, recompute(np.linalg.inv(C), 0, 1.5), rtol=1e-14)


@pytest.mark.parametrize("seed", range(10))
def test_rank_one_matches_full_recompute(seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(0, 1 / math.sqrt(10), (8, 10))
    P = A.T @ A / 0.1 + np.diag(rng.uniform(0.5, 3.0, 10))
    C = np.linalg.inv(P)
    n = int(rng.integers(10))
    d_xi = float(rng.uniform(-0.4, 5.0))
    out = rank_one_downdate(C, n, 1.0 / d_xi + C[n, n])
    ref = recompute(P, n, d_xi)
    assert np.linalg.norm(out - ref) / np.linalg.norm(ref) < 1e-10
    np.testing.assert_array_equal(out, out.T)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 6))
def test_determinant_lemma(seed, n):
    rng = np.random.default_rng(seed)
    A = random_spd(rng, n)
    B = rng.normal(size=(n, 1))
    D = rng.normal(size=(1, n))
    Cs = np.array([[rng.uniform(0.1, 2.0)]])
    lhs = np.linalg.det(A + B @ Cs @ D)
    rhs = np.linalg.det(A) * np.linalg.det(Cs) * np.linalg.det(np.linalg.inv(Cs) + D @ np.linalg.inv(A) @ B)
    assert lhs == pytest.approx(rhs, rel=1e-9)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 6), st.integers(1, 3))
def test_matrix_inversion_lemma(seed, n, k):
    rng = np.random.default_rng(seed)
    A = random_spd(rng, n)
    B = rng.normal(size=(n, k))
    Cs = random_spd(rng, k)
    D = B.T
    lhs = D @ np.linalg.inv(A + B @ Cs @ D)
    Ai = np.linalg.inv(A)
    rhs = np.linalg.inv(Cs) @ np.linalg.inv(D @ Ai @ B + np.linalg.inv(Cs)) @ D @ Ai
    np.testing.assert_allclose(lhs, rhs, rtol=1e-9, atol=1e-9)
