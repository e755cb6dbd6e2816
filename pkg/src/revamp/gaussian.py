"""Scalar and small dense Gaussian algebra.

Scalar messages live in two forms: moment form (:class:`Gaussian1D`) and
natural form (:class:`GaussianNatural1D`). Only the natural form can carry a
flat message (zero precision), which is how infinite variances are encoded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import InvalidParameterError, SingularUpdateError

LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class Gaussian1D:
    """Scalar Gaussian in moment form.

    ``var`` may be negative when the pair describes a message rather than a
    belief; zero and non-finite values are rejected.
    """

    mean: float
    var: float

    def __post_init__(self):
        if not (math.isfinite(self.mean) and math.isfinite(self.var)):
            raise InvalidParameterError(f"non-finite moments ({self.mean}, {self.var})")
        if self.var == 0.0:
            raise InvalidParameterError("zero variance has no moment-form message")


@dataclass(frozen=True)
class GaussianNatural1D:
    """Scalar Gaussian in natural form: ``nu = mean/var``, ``xi = 1/var``.

    ``xi <= 0`` is legal and denotes an improper message.
    """

    nu: float
    xi: float

    def __post_init__(self):
        if not (math.isfinite(self.nu) and math.isfinite(self.xi)):
            raise InvalidParameterError(f"non-finite natural parameters ({self.nu}, {self.xi})")

    def to_moment(self) -> Gaussian1D:
        if self.xi == 0.0:
            raise InvalidParameterError("zero precision has no moment form")
        return Gaussian1D(self.nu / self.xi, 1.0 / self.xi)


@dataclass(frozen=True)
class GaussianND:
    """Multivariate Gaussian (mean vector, covariance matrix)."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        cov = np.asarray(self.cov, dtype=float)
        n = mean.shape[-1]
        if cov.shape != (n, n):
            raise InvalidParameterError(f"covariance shape {cov.shape} does not match mean length {n}")
        scale = max(np.max(np.abs(cov)), 1.0) if cov.size else 1.0
        if np.max(np.abs(cov - cov.T), initial=0.0) > 1e-12 * scale:
            raise InvalidParameterError("covariance is not symmetric")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def var(self) -> np.ndarray:
        return np.diag(self.cov).copy()


def to_natural(g: Gaussian1D) -> GaussianNatural1D:
    if g.var == 0.0:
        raise InvalidParameterError("zero variance")
    return GaussianNatural1D(g.mean / g.var, 1.0 / g.var)


def natural_combine(a: GaussianNatural1D, b: GaussianNatural1D, sign: int = 1) -> GaussianNatural1D:
    """Product (``sign=+1``) or quotient (``sign=-1``) of two Gaussian kernels."""
    if sign not in (1, -1):
        raise InvalidParameterError(f"sign must be +1 or -1, got {sign}")
    return GaussianNatural1D(a.nu + sign * b.nu, a.xi + sign * b.xi)


def cholesky(P, what="matrix", error=InvalidParameterError):
    """Lower Cholesky factor of a symmetric positive definite matrix.

    No jitter is added; failure to factor raises ``error``.
    """
    P = np.asarray(P, dtype=float)
    if not np.all(np.isfinite(P)):
        raise error(f"{what} has non-finite entries")
    try:
        L = np.linalg.cholesky(P)
    except np.linalg.LinAlgError as exc:
        raise error(f"{what} is not positive definite") from exc
    if np.any(np.diag(L) <= 0.0):
        raise error(f"{what} is not positive definite")
    return L


def spd_inverse(P, what="matrix", error=InvalidParameterError):
    """Inverse of a symmetric positive definite matrix, symmetrized."""
    L = cholesky(P, what, error)
    Linv = linalg.solve_triangular(L, np.eye(L.shape[0]), lower=True)
    inv = Linv.T @ Linv
    return 0.5 * (inv + inv.T)


def reproduce(prior: GaussianND, A, obs_mean, obs_cov):
    """Gaussian reproduction lemma.

    ``N(x|m1, C1) N(Ax|m2, C2) = N(m2|A m1, A C1 A' + C2) N(x|m3, C3)``.
    Returns ``(log N(m2|A m1, A C1 A' + C2), GaussianND(m3, C3))``.

    ``prior.mean`` may carry leading batch dimensions ``(..., N)``; the
    covariances are shared across the batch and the log-evidence then has the
    batch shape.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    m1 = np.asarray(prior.mean, dtype=float)
    m2 = np.asarray(obs_mean, dtype=float)
    C1 = prior.cov
    C2 = np.asarray(obs_cov, dtype=float)
    M, N = A.shape
    if C1.shape != (N, N) or C2.shape != (M, M) or m2.shape[-1] != M:
        raise InvalidParameterError("dimension mismatch in reproduce")

    L1 = cholesky(C1, "prior covariance")
    L2 = cholesky(C2, "observation covariance")
    C1inv = linalg.cho_solve((L1, True), np.eye(N))
    C2inv_A = linalg.cho_solve((L2, True), A)
    C3 = spd_inverse(C1inv + A.T @ C2inv_A, "posterior precision")
    rhs = m1 @ C1inv + m2 @ C2inv_A
    m3 = rhs @ C3

    S = A @ C1 @ A.T + C2
    S = 0.5 * (S + S.T)
    LS = cholesky(S, "evidence covariance")
    resid = m2 - m1 @ A.T
    z = linalg.solve_triangular(LS, np.moveaxis(np.atleast_2d(resid), -1, 0), lower=True)
    quad = np.sum(z * z, axis=0).reshape(resid.shape[:-1])
    logdet = 2.0 * np.sum(np.log(np.diag(LS)))
    logpdf = -0.5 * (quad + logdet + M * LOG_2PI)
    if np.ndim(logpdf) == 0:
        logpdf = float(logpdf)
    return logpdf, GaussianND(m3, C3)


def rank_one_downdate(C, n: int, denominator: float):
    """``C - C[:, n] C[:, n]' / denominator``, symmetrized.

    ``denominator = inf`` is the no-op update (precision change of zero).
    """
    if denominator == 0.0:
        raise SingularUpdateError(f"zero denominator in rank-one update at index {n}")
    C = np.asarray(C, dtype=float)
    if math.isinf(denominator):
        return C.copy()
    c = C[:, n]
    out = C - np.outer(c, c) / denominator
    return 0.5 * (out + out.T)
