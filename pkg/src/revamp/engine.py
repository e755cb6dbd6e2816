"""Sequential EP for ``y = A x + v`` with independent per-symbol priors.

The messages from the prior factors to the likelihood factor are kept in
natural parameters ``(nu_p, xi_p)`` for every strategy, so a flat message
(``xi_p = 0``) needs no special casing. The belief at the likelihood factor
is ``N(x | mu, C)`` with ``C = (A'A/s2 + Diag(xi_p))^-1`` and
``mu = C (A'y/s2 + nu_p)``; it is maintained by rank-one updates.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.linalg import cho_solve

from .errors import (
    ImproperBeliefError,
    InvalidParameterError,
    SingularExtrinsicError,
    SingularUpdateError,
)
from .gaussian import Gaussian1D, GaussianND, cholesky, rank_one_downdate, spd_inverse
from .priors import MixturePrior, posterior_moments, prior_moments
from .strategies import REJECTED, CandidateUpdate, LookAhead, StepOutcome, Strategy

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LinearProblem:
    """``y = A x + v`` with ``v ~ N(0, noise_var I)`` and ``x_n ~ priors[n]``."""

    A: np.ndarray
    y: np.ndarray
    noise_var: float
    priors: Sequence[MixturePrior]

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        y = np.atleast_1d(np.asarray(self.y, dtype=float))
        priors = tuple(self.priors)
        M, N = A.shape
        if y.shape != (M,):
            raise InvalidParameterError(f"y has shape {y.shape}, expected ({M},)")
        if len(priors) != N:
            raise InvalidParameterError(f"{len(priors)} priors for {N} symbols")
        if not (math.isfinite(self.noise_var) and self.noise_var > 0):
            raise InvalidParameterError("noise_var must be positive and finite")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(y))):
            raise InvalidParameterError("A and y must be finite")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "noise_var", float(self.noise_var))
        object.__setattr__(self, "priors", priors)

    @property
    def shape(self):
        return self.A.shape

    @property
    def N(self) -> int:
        return self.A.shape[1]

    @cached_property
    def gram(self) -> np.ndarray:
        """``A' C_v^-1 A``."""
        G = self.A.T @ self.A / self.noise_var
        return 0.5 * (G + G.T)

    @cached_property
    def data_term(self) -> np.ndarray:
        """``A' C_v^-1 y``."""
        return self.A.T @ self.y / self.noise_var


@dataclass
class EpState:
    nu_p: np.ndarray
    xi_p: np.ndarray
    belief_cov: np.ndarray
    belief_mean: np.ndarray
    mu_r: np.ndarray
    tau_r: np.ndarray
    sweep: int = 0
    t: int = 0

    def copy(self) -> "EpState":
        return EpState(
            self.nu_p.copy(),
            self.xi_p.copy(),
            self.belief_cov.copy(),
            self.belief_mean.copy(),
            self.mu_r.copy(),
            self.tau_r.copy(),
            self.sweep,
            self.t,
        )

    def extrinsic(self, n: int) -> Gaussian1D:
        return Gaussian1D(float(self.mu_r[n]), float(self.tau_r[n]))


@dataclass
class EstimateReport:
    x_hat: np.ndarray
    per_symbol_var: np.ndarray
    sweeps_run: int
    converged: bool
    rejected_updates: int
    modified_updates: int = 0
    state: Optional[EpState] = field(default=None, repr=False)


def compute_belief(problem: LinearProblem, nu_p, xi_p) -> GaussianND:
    P = problem.gram + np.diag(np.asarray(xi_p, dtype=float))
    L = cholesky(P, "belief precision", ImproperBeliefError)
    mean = cho_solve((L, True), problem.data_term + np.asarray(nu_p, dtype=float))
    cov = spd_inverse(P, "belief precision", ImproperBeliefError)
    return GaussianND(mean, cov)


def _extrinsic_natural(cov_diag, mean, nu_p, xi_p):
    """Extrinsic precision and precision-times-mean for every symbol."""
    rho = 1.0 / cov_diag - xi_p
    h = mean / cov_diag - nu_p
    return rho, h


def _moments_from_natural(rho, h):
    if rho.all():
        return h / rho, 1.0 / rho
    with np.errstate(divide="ignore", invalid="ignore"):
        tau = np.where(rho != 0.0, 1.0 / rho, np.inf)
        mu = np.where(rho != 0.0, h * tau, np.nan)
    return mu, tau


def compute_extrinsics(belief: GaussianND, nu_p, xi_p):
    """Extrinsic pairs ``(mu_r, tau_r)`` from the likelihood-factor belief.

    Negative ``tau_r`` entries are legal. An exact precision cancellation
    raises :class:`SingularExtrinsicError`.
    """
    rho, h = _extrinsic_natural(np.diag(belief.cov), belief.mean, np.asarray(nu_p), np.asarray(xi_p))
    if np.any(rho == 0.0):
        bad = np.flatnonzero(rho == 0.0)
        raise SingularExtrinsicError(f"infinite extrinsic variance at symbols {bad.tolist()}")
    return h / rho, 1.0 / rho


def extrinsic_leave_one_out(problem: LinearProblem, nu_p, xi_p, n: int) -> Gaussian1D:
    """Extrinsic of symbol ``n`` computed from the other symbols' messages only.

    Uses the moment-form expression
    ``tau = [a_n' (C_v + A_{-n} C_p A_{-n}')^-1 a_n]^-1`` when every other
    message has positive precision, otherwise the belief obtained by zeroing
    the ``n``-th message precision.
    """
    nu_p = np.asarray(nu_p, dtype=float)
    xi_p = np.asarray(xi_p, dtype=float)
    A = problem.A
    others = np.arange(problem.N) != n
    if np.all(xi_p[others] > 0.0):
        A_o = A[:, others]
        tau_o = 1.0 / xi_p[others]
        mu_o = nu_p[others] * tau_o
        S = problem.noise_var * np.eye(A.shape[0]) + (A_o * tau_o) @ A_o.T
        L = cholesky(0.5 * (S + S.T), "leave-one-out covariance", ImproperBeliefError)
        a = A[:, n]
        Sa = cho_solve((L, True), a)
        tau = 1.0 / float(a @ Sa)
        mu = tau * float(Sa @ (problem.y - A_o @ mu_o))
        return Gaussian1D(mu, tau)
    xi_loo = xi_p.copy()
    nu_loo = nu_p.copy()
    xi_loo[n] = 0.0
    nu_loo[n] = 0.0
    b = compute_belief(problem, nu_loo, xi_loo)
    return Gaussian1D(float(b.mean[n]), float(b.cov[n, n]))


def _refresh_extrinsics(state: EpState) -> None:
    rho, h = _extrinsic_natural(np.diag(state.belief_cov), state.belief_mean, state.nu_p, state.xi_p)
    state.mu_r, state.tau_r = _moments_from_natural(rho, h)


def init_state(problem: LinearProblem) -> EpState:
    """Messages initialised to the Gaussian moments of each prior."""
    N = problem.N
    xi = np.empty(N)
    nu = np.empty(N)
    for n, prior in enumerate(problem.priors):
        pm = prior_moments(prior)
        if not pm.var > 0.0:
            raise InvalidParameterError(f"prior {n} has zero variance")
        xi[n] = 1.0 / pm.var
        nu[n] = pm.mean * xi[n]
    b = compute_belief(problem, nu, xi)
    state = EpState(nu, xi, b.cov, b.mean, np.zeros(N), np.zeros(N))
    _refresh_extrinsics(state)
    return state


class EngineView:
    """Read-only access to one run's state for look-ahead strategies."""

    def __init__(self, problem: LinearProblem, state: EpState):
        self.problem = problem
        self.state = state

    @property
    def priors(self):
        return self.problem.priors

    def look_ahead(self, c: CandidateUpdate) -> LookAhead:
        s = self.state
        n = c.n
        d_xi = c.xi_hat_p - s.xi_p[n]
        C = s.belief_cov
        gain = 1.0 + d_xi * C[n, n]
        if not gain > 0.0:
            return LookAhead(False)
        col = C[:, n]
        C_new = C - np.outer(col, col) * (d_xi / gain)
        xi = s.xi_p.copy()
        nu = s.nu_p.copy()
        xi[n] = c.xi_hat_p
        nu[n] = c.nu_hat_p
        mean = C_new @ (self.problem.data_term + nu)
        rho, h = _extrinsic_natural(np.diag(C_new), mean, nu, xi)
        return LookAhead(True, rho, h)


def _apply(problem: LinearProblem, state: EpState, n: int, nu_new: float, xi_new: float) -> None:
    d_xi = xi_new - state.xi_p[n]
    C = state.belief_cov
    if d_xi != 0.0:
        if not 1.0 + d_xi * C[n, n] > 0.0:
            raise ImproperBeliefError(
                f"update of symbol {n} makes the belief precision indefinite (xi={xi_new!r})"
            )
        denom = 1.0 / d_xi + C[n, n]
        if denom == 0.0 or not math.isfinite(denom):
            raise SingularUpdateError(f"singular rank-one update at symbol {n}")
        state.belief_cov = rank_one_downdate(C, n, denom)
    state.xi_p[n] = xi_new
    state.nu_p[n] = nu_new
    state.belief_mean = state.belief_cov @ (problem.data_term + state.nu_p)
    _refresh_extrinsics(state)


def step(state: EpState, problem: LinearProblem, n: int, strategy: Strategy):
    """One sequential update of the message from prior factor ``n``.

    Returns ``(new_state, StepOutcome)``; the input state is not modified.
    """
    new = state.copy()
    new.t += 1
    tau_r = state.tau_r[n]
    if not math.isfinite(tau_r):
        log.debug("symbol %d: infinite extrinsic variance, step skipped", n)
        return new, StepOutcome(REJECTED, "singular extrinsic (precision cancellation)")
    extrinsic = state.extrinsic(n)
    prior = problem.priors[n]

    reason = strategy.precheck(n, extrinsic, prior)
    if reason is not None:
        return new, StepOutcome(REJECTED, reason)

    tilted = posterior_moments(prior, extrinsic)
    cand = CandidateUpdate.from_moments(n, tilted, extrinsic)
    outcome = strategy.decide(cand, EngineView(problem, state))
    if outcome.applied:
        _apply(problem, new, n, outcome.nu_p, outcome.xi_p)
    return new, outcome


def run(
    problem: LinearProblem,
    strategy: Strategy,
    max_sweeps: int = 200,
    tol: float = 1e-8,
    on_step: Optional[Callable[[EpState, EpState, StepOutcome], None]] = None,
    state: Optional[EpState] = None,
) -> EstimateReport:
    """Round-robin sweeps until the belief mean moves less than ``tol`` in a sweep."""
    if state is None:
        state = init_state(problem)
    N = problem.N
    rejected = modified = 0
    converged = False
    for sweep in range(1, max_sweeps + 1):
        start = state.belief_mean.copy()
        for n in range(N):
            new, outcome = step(state, problem, n, strategy)
            if outcome.decision == REJECTED:
                rejected += 1
            elif outcome.decision == "modified":
                modified += 1
            if on_step is not None:
                on_step(state, new, outcome)
            state = new
        state.sweep = sweep
        if np.max(np.abs(state.belief_mean - start)) < tol:
            converged = True
            break
    return EstimateReport(
        x_hat=state.belief_mean.copy(),
        per_symbol_var=np.diag(state.belief_cov).copy(),
        sweeps_run=state.sweep,
        converged=converged,
        rejected_updates=rejected,
        modified_updates=modified,
        state=state,
    )
