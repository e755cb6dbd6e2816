import numpy as np
import pytest
from helpers import exact_gaussian_posterior, make_problem

from revamp.engine import LinearProblem, compute_belief, init_state
from revamp.errors import TooLargeError
from revamp.gaussian import Gaussian1D
from revamp.oracles import brute_force_mmse, lmmse
from revamp.priors import MixturePrior, quadrature_moments


def test_lmmse_identity_example():
    y = np.array([0.4, -1.0, 2.0])
    pb = LinearProblem(np.eye(3), y, 1.0, [MixturePrior.gaussian(0.0, 1.0)] * 3)
    np.testing.assert_allclose(lmmse(pb).mean, y / 2, rtol=1e-15)


@pytest.mark.parametrize("seed", range(5))
def test_lmmse_matches_dense_conditioning(seed):
    pb = make_problem("gauss", 8, 10, 10, seed)
    mean, cov = exact_gaussian_posterior(pb)
    est = lmmse(pb)
    np.testing.assert_allclose(est.mean, mean, rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(est.cov, cov, rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("kind", ["sparse", "bpsk"])
def test_lmmse_equals_initial_belief(kind):
    pb = make_problem(kind, 8, 10, 20, 1)
    s = init_state(pb)
    b = compute_belief(pb, s.nu_p, s.xi_p)
    est = lmmse(pb)
    np.testing.assert_allclose(est.mean, b.mean, rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(est.cov, b.cov, rtol=1e-10, atol=1e-14)


@pytest.mark.parametrize("seed", range(5))
def test_brute_force_single_component_is_lmmse(seed):
    pb = make_problem("gauss", 8, 10, 5 * seed, seed)
    bf, lm = brute_force_mmse(pb), lmmse(pb)
    np.testing.assert_allclose(bf.mean, lm.mean, rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(bf.cov, lm.cov, rtol=1e-10, atol=1e-12)
    assert bf.log_evidence == pytest.approx(lm.log_evidence, rel=1e-10)


def scalar_problem(rng, prior):
    a = float(rng.normal(0, 1))
    noise = float(10 ** rng.uniform(-3, 0))
    y = float(rng.normal(0, 1.5))
    return LinearProblem(np.array([[a]]), np.array([y]), noise, [prior])


@pytest.mark.parametrize("seed", range(20))
def test_brute_force_scalar_matches_quadrature(seed):
    rng = np.random.default_rng(seed)
    prior = MixturePrior.bpsk() if seed % 2 else MixturePrior([0.2, 0.5, 0.3], [-1.0, 0.2, 2.0], [0.05, 0.3, 0.1])
    pb = scalar_problem(rng, prior)
    a, y = pb.A[0, 0], pb.y[0]
    # the likelihood in x is Gaussian with mean y/a and variance noise/a^2
    q = quadrature_moments(prior, Gaussian1D(y / a, pb.noise_var / a**2))
    bf = brute_force_mmse(pb)
    assert bf.mean[0] == pytest.approx(q.mean, abs=1e-8)
    assert bf.cov[0, 0] == pytest.approx(q.var, abs=1e-8)


def test_weights_normalized():
    bf = brute_force_mmse(make_problem("sparse", 8, 10, 30, 3))
    assert len(bf.weights) == 2**10
    assert bf.weights.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(bf.weights >= 0)


def test_cov_symmetric_pd():
    bf = brute_force_mmse(make_problem("bpsk", 20, 10, 0, 2))
    np.testing.assert_array_equal(bf.cov, bf.cov.T)
    assert np.linalg.eigvalsh(bf.cov)[0] > 0


@pytest.mark.parametrize("kind", ["sparse", "spike"])
def test_permutation_equivariance(kind):
    pb = make_problem(kind, 8, 6, 15, 9)
    perm = np.random.default_rng(1).permutation(6)
    pb2 = LinearProblem(pb.A[:, perm], pb.y, pb.noise_var, [pb.priors[i] for i in perm])
    a, b = brute_force_mmse(pb), brute_force_mmse(pb2)
    np.testing.assert_allclose(b.mean, a.mean[perm], rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(b.cov, a.cov[np.ix_(perm, perm)], rtol=1e-10, atol=1e-12)


def test_enumeration_guard():
    pb = make_problem("bpsk", 30, 21, 10, 0)
    with pytest.raises(TooLargeError):
        brute_force_mmse(pb)
    with pytest.raises(TooLargeError):
        brute_force_mmse(make_problem("bpsk", 8, 4, 10, 0), max_assignments=15)


def test_brute_force_beats_lmmse_on_average():
    err_bf = err_lm = 0.0
    for seed in range(30):
        rng = np.random.default_rng(100 + seed)
        prior = MixturePrior.bpsk()
        A = rng.normal(0, 1 / np.sqrt(4), (6, 4))
        x = rng.choice([-1.0, 1.0], 4) + 0.1 * rng.normal(size=4)
        pb = LinearProblem(A, A @ x + rng.normal(0, 0.5, 6), 0.25, [prior] * 4)
        err_bf += np.sum((brute_force_mmse(pb).mean - x) ** 2)
        err_lm += np.sum((lmmse(pb).mean - x) ** 2)
    assert err_bf < err_lm


def test_sparse_runtime_is_small():
    import time

    pb = make_problem("sparse", 8, 10, 20, 0)
    t0 = time.perf_counter()
    brute_force_mmse(pb)
    assert time.perf_counter() - t0 < 1.0
