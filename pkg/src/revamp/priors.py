"""Per-symbol Gaussian-mixture priors and their tilted moments.

The tilted distribution of a prior ``p(x)`` under a scalar Gaussian kernel
``exp(-(x - mu_r)^2 / (2 tau_r))`` is the belief at a prior factor. The
kernel variance ``tau_r`` may be negative (an improper message); the product
is still integrable as long as every component's combined precision
``1/s_k + 1/tau_r`` stays positive.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import ImproperBeliefError, InvalidParameterError
from .gaussian import Gaussian1D


@dataclass(frozen=True)
class MixturePrior:
    weights: np.ndarray
    means: np.ndarray
    vars: np.ndarray

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        m = np.atleast_1d(np.asarray(self.means, dtype=float))
        s = np.atleast_1d(np.asarray(self.vars, dtype=float))
        if not (w.ndim == m.ndim == s.ndim == 1 and w.shape == m.shape == s.shape and w.size > 0):
            raise InvalidParameterError("weights, means and vars must be equal-length vectors")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(m)) and np.all(np.isfinite(s))):
            raise InvalidParameterError("mixture parameters must be finite")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise InvalidParameterError(f"weights must be non-negative and sum to 1 (sum={w.sum()!r})")
        if np.any(s <= 0):
            raise InvalidParameterError("component variances must be positive")
        for name, arr in (("weights", w), ("means", m), ("vars", s)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_components(self) -> int:
        return self.weights.size

    @classmethod
    def gaussian(cls, mean: float = 0.0, var: float = 1.0) -> "MixturePrior":
        return cls([1.0], [mean], [var])

    @classmethod
    def bpsk(cls, var: float = 0.01) -> "MixturePrior":
        """Equiprobable +-1 symbols blurred by Gaussian components."""
        return cls([0.5, 0.5], [-1.0, 1.0], [var, var])

    @classmethod
    def sparse(cls, n: int) -> "MixturePrior":
        """Prior of symbol ``n`` (1-based) with amplitudes decaying as ``3.2**(1-n)``."""
        if n < 1:
            raise InvalidParameterError("symbol index is 1-based")
        amp = 3.2 ** (1 - n)
        return cls([0.5, 0.5], [-amp, amp], [0.1 * amp**2, 0.1 * amp**2])

    def __eq__(self, other):
        if not isinstance(other, MixturePrior):
            return NotImplemented
        return (
            np.array_equal(self.weights, other.weights)
            and np.array_equal(self.means, other.means)
            and np.array_equal(self.vars, other.vars)
        )

    __hash__ = None


@dataclass(frozen=True)
class PriorMoments:
    mean: float
    var: float


def prior_moments(prior: MixturePrior) -> PriorMoments:
    w, m, s = prior.weights, prior.means, prior.vars
    mean = float(w @ m)
    var = float(w @ s + w @ (m - mean) ** 2)
    return PriorMoments(mean, var)


def second_moment(prior: MixturePrior) -> float:
    return float(prior.weights @ (prior.vars + prior.means**2))


def is_tilt_proper(prior: MixturePrior, precision: float) -> bool:
    """Integrability of ``p(x) exp(-precision (x - mu)^2 / 2)``."""
    return bool(np.all(1.0 / prior.vars + precision > 0.0))


def is_belief_proper(prior: MixturePrior, pseudo_obs: Gaussian1D) -> bool:
    return is_tilt_proper(prior, 1.0 / pseudo_obs.var)


def _tilted_components(prior: MixturePrior, mu_r: float, tau_r: float):
    """Responsibilities, means and variances of the tilted mixture."""
    s = prior.vars
    prec = 1.0 / s + 1.0 / tau_r
    if np.any(prec <= 0.0):
        raise ImproperBeliefError(
            f"tilted belief not normalizable (tau_r={tau_r!r}, max component var={float(s.max())!r})"
        )
    post_var = 1.0 / prec
    post_mean = post_var * (prior.means / s + mu_r / tau_r)
    # Component evidence relative to the kernel:
    #   int N(x|m, s) exp(-(x-mu_r)^2/(2 tau_r)) dx = sqrt(s'/s) exp(-(mu_r-m)^2 / (2 (s+tau_r)))
    # with s' the tilted variance; s'/s > 0 whenever the tilt is proper even if s+tau_r < 0.
    with np.errstate(divide="ignore"):
        logw = np.log(prior.weights)
    logr = logw + 0.5 * np.log(post_var / s) - 0.5 * (mu_r - prior.means) ** 2 / (s + tau_r)
    r = np.exp(logr - logr.max())
    return r / r.sum(), post_mean, post_var


def responsibilities(prior: MixturePrior, pseudo_obs: Gaussian1D) -> np.ndarray:
    r, _, _ = _tilted_components(prior, pseudo_obs.mean, pseudo_obs.var)
    return r


def posterior_moments(prior: MixturePrior, pseudo_obs: Gaussian1D) -> Gaussian1D:
    """Exact mean and variance of ``p(x) * UN(x | pseudo_obs)``.

    Raises :class:`ImproperBeliefError` when the product is not integrable.
    """
    r, pm, pv = _tilted_components(prior, pseudo_obs.mean, pseudo_obs.var)
    mean = float(r @ pm)
    var = float(r @ pv + r @ (pm - mean) ** 2)
    return Gaussian1D(mean, var)


def quadrature_moments(prior: MixturePrior, pseudo_obs: Gaussian1D, *, width: float = 8.0) -> Gaussian1D:
    """Tilted moments by adaptive numerical integration.

    Independent of :func:`posterior_moments`; used as a reference. The
    integration support is the union of ``+-width`` standard deviations around
    every component-times-kernel product.
    """
    mu_r, tau_r = pseudo_obs.mean, pseudo_obs.var
    w = np.asarray(prior.weights, dtype=float)
    m = np.asarray(prior.means, dtype=float)
    s = np.asarray(prior.vars, dtype=float)
    if np.any(1.0 / s + 1.0 / tau_r <= 0.0):
        raise ImproperBeliefError("tilted belief not normalizable")

    keep = w > 0
    w, m, s = w[keep], m[keep], s[keep]
    lo, hi, centers = [], [], []
    for mk, sk in zip(m, s):
        v = 1.0 / (1.0 / sk + 1.0 / tau_r)
        c = v * (mk / sk + mu_r / tau_r)
        centers.append(c)
        lo.append(c - width * math.sqrt(v))
        hi.append(c + width * math.sqrt(v))

    comps = [
        (math.log(wk) - 0.5 * math.log(2.0 * math.pi * sk), mk, 0.5 / sk) for wk, mk, sk in zip(w, m, s)
    ]
    half_prec_r = 0.5 / tau_r

    def log_density(x):
        terms = [lw - h * (x - mk) ** 2 for lw, mk, h in comps]
        top = max(terms)
        return top + math.log(sum(math.exp(t - top) for t in terms)) - half_prec_r * (x - mu_r) ** 2

    shift = max(log_density(c) for c in centers)

    # merge overlapping intervals
    order = np.argsort(lo)
    pieces = []
    for i in order:
        if pieces and lo[i] <= pieces[-1][1]:
            pieces[-1][1] = max(pieces[-1][1], hi[i])
            pieces[-1][2].append(centers[i])
        else:
            pieces.append([lo[i], hi[i], [centers[i]]])

    def integrate_all(fn):
        total = 0.0
        for a, b, cs in pieces:
            pts = sorted(c for c in cs if a < c < b)
            with warnings.catch_warnings():
                # roundoff notices near the tolerance floor are expected
                warnings.simplefilter("ignore", integrate.IntegrationWarning)
                val, _ = integrate.quad(fn, a, b, points=pts or None, epsabs=0.0, epsrel=1e-12, limit=200)
            total += val
        return total

    def dens(x):
        return math.exp(log_density(x) - shift)

    z = integrate_all(dens)
    if not (z > 0.0 and math.isfinite(z)):
        raise ImproperBeliefError("numerical normalizer is not positive and finite")
    mean = integrate_all(lambda x: x * dens(x)) / z
    var = integrate_all(lambda x: (x - mean) ** 2 * dens(x)) / z
    return Gaussian1D(mean, var)
