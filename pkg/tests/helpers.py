"""Instance generators shared by the test modules."""

import numpy as np

from revamp.engine import LinearProblem
from revamp.priors import MixturePrior, second_moment

SPIKE_SLAB = MixturePrior([0.8, 0.2], [0.0, 0.0], [1e-2, 5.0])


def scenario_priors(kind, N):
    if kind == "sparse":
        return [MixturePrior.sparse(n + 1) for n in range(N)]
    if kind == "bpsk":
        return [MixturePrior.bpsk()] * N
    if kind == "spike":
        return [SPIKE_SLAB] * N
    if kind == "gauss":
        return [MixturePrior.gaussian(0.3 * n - 1.0, 0.5 + 0.1 * n) for n in range(N)]
    raise ValueError(kind)


def make_problem(kind, M, N, snr_db, seed):
    rng = np.random.default_rng(seed)
    priors = scenario_priors(kind, N)
    A = rng.normal(0.0, 1.0 / np.sqrt(N), (M, N))
    x = np.empty(N)
    for n, p in enumerate(priors):
        k = rng.choice(p.n_components, p=p.weights)
        x[n] = p.means[k] + np.sqrt(p.vars[k]) * rng.normal()
    noise_var = sum(second_moment(p) for p in priors) / N / 10 ** (snr_db / 10)
    y = A @ x + rng.normal(0.0, np.sqrt(noise_var), M)
    return LinearProblem(A, y, noise_var, priors)


def exact_gaussian_posterior(problem):
    """Posterior of x for single-component priors via dense joint conditioning."""
    m0 = np.array([p.means[0] for p in problem.priors])
    C0 = np.diag([p.vars[0] for p in problem.priors])
    A = problem.A
    S = A @ C0 @ A.T + problem.noise_var * np.eye(A.shape[0])
    K = np.linalg.solve(S, A @ C0).T
    return m0 + K @ (problem.y - A @ m0), C0 - K @ A @ C0


def rel_fro(X, ref):
    return np.linalg.norm(X - ref) / np.linalg.norm(ref)
