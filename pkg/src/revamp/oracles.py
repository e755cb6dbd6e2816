"""Reference estimators: exact MMSE by enumeration, and LMMSE.

Nothing here touches the EP engine; the only shared primitive is
:func:`revamp.gaussian.reproduce`.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import TooLargeError
from .gaussian import GaussianND, reproduce
from .priors import prior_moments

MAX_ASSIGNMENTS = 2**20


@dataclass
class OracleEstimate:
    mean: np.ndarray
    cov: np.ndarray
    log_evidence: float
    weights: np.ndarray = None


def _obs(problem):
    M = problem.A.shape[0]
    return problem.y, problem.noise_var * np.eye(M)


def brute_force_mmse(problem, max_assignments: int = MAX_ASSIGNMENTS) -> OracleEstimate:
    """Exact posterior mean and covariance under Gaussian-mixture priors.

    Enumerates every joint component assignment. Assignments that share the
    same vector of component variances share one factorization; their prior
    means are pushed through :func:`reproduce` as a batch.
    """
    priors = problem.priors
    sizes = [p.n_components for p in priors]
    total = math.prod(sizes)
    if total > max_assignments:
        raise TooLargeError(f"{total} component assignments exceed the limit {max_assignments}")
    y, Cv = _obs(problem)
    N = len(priors)

    # group component indices of each symbol by their variance
    groups = []
    for p in priors:
        by_var = {}
        for k, s in enumerate(p.vars):
            by_var.setdefault(float(s), []).append(k)
        groups.append(list(by_var.items()))

    log_w_all, means_all, covs = [], [], []
    for pattern in itertools.product(*groups):
        var_vec = np.array([s for s, _ in pattern])
        comp_lists = [ks for _, ks in pattern]
        assign = np.array(list(itertools.product(*comp_lists)), dtype=int).reshape(-1, N)
        prior_means = np.array([[priors[n].means[k] for n, k in enumerate(row)] for row in assign])
        log_prior_w = np.array([sum(math.log(priors[n].weights[k]) if priors[n].weights[k] > 0 else -math.inf
                                    for n, k in enumerate(row)) for row in assign])
        logev, post = reproduce(GaussianND(prior_means, np.diag(var_vec)), problem.A, y, Cv)
        log_w_all.append(log_prior_w + np.atleast_1d(logev))
        means_all.append(np.atleast_2d(post.mean))
        covs.append((len(assign), post.cov))

    log_w = np.concatenate(log_w_all)
    log_z = float(logsumexp(log_w))
    w = np.exp(log_w - log_z)
    means = np.concatenate(means_all, axis=0)
    mean = w @ means

    cov = np.zeros((N, N))
    start = 0
    for count, C in covs:
        cov += w[start:start + count].sum() * C
        start += count
    centered = means - mean
    cov += (centered * w[:, None]).T @ centered
    cov = 0.5 * (cov + cov.T)
    return OracleEstimate(mean, cov, log_z, w)


def lmmse(problem) -> OracleEstimate:
    """Linear MMSE: every prior replaced by a Gaussian with matching moments."""
    pm = [prior_moments(p) for p in problem.priors]
    prior = GaussianND(np.array([m.mean for m in pm]), np.diag([m.var for m in pm]))
    y, Cv = _obs(problem)
    logev, post = reproduce(prior, problem.A, y, Cv)
    return OracleEstimate(post.mean, post.cov, float(logev))
