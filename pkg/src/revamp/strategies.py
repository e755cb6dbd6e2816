"""Handlers for prior-factor message updates with non-positive precision.

Every strategy sees the candidate update produced by plain moment matching
and decides whether it is applied as-is (``accepted``), replaced by another
message (``modified``) or dropped so the previous message persists
(``rejected``).

Available names::

    ideal                  apply every candidate, may block later
    clip                   non-positive precision -> flat message with zero mean
    persistent-strict      skip the update when the current tilted belief is improper
    persistent-relaxed     skip the update when the current extrinsic variance is <= 0
    nonpersistent-strict   look ahead one step; skip if any tilted belief would be improper
    nonpersistent-relaxed  look ahead one step; skip if any extrinsic variance would be <= 0
    acrevamp               non-positive precision -> flat message that keeps the tilted mean
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidParameterError, InvariantError
from .gaussian import Gaussian1D
from .priors import MixturePrior, is_belief_proper, is_tilt_proper

ACCEPTED = "accepted"
REJECTED = "rejected"
MODIFIED = "modified"

STRICT = "strict"
RELAXED = "relaxed"


@dataclass(frozen=True)
class CandidateUpdate:
    """Unchecked natural-parameter update for symbol ``n``."""

    n: int
    xi_hat_p: float
    nu_hat_p: float
    tilted_mean: float
    tilted_var: float
    extrinsic: Gaussian1D

    def __post_init__(self):
        if not self.tilted_var > 0.0:
            raise InvalidParameterError("candidate built from an improper tilted belief")

    @classmethod
    def from_moments(cls, n: int, tilted: Gaussian1D, extrinsic: Gaussian1D) -> "CandidateUpdate":
        xi = 1.0 / tilted.var - 1.0 / extrinsic.var
        nu = tilted.mean / tilted.var - extrinsic.mean / extrinsic.var
        return cls(n, xi, nu, tilted.mean, tilted.var, extrinsic)


@dataclass(frozen=True)
class StepOutcome:
    decision: str
    reason: str = ""
    nu_p: Optional[float] = None
    xi_p: Optional[float] = None
    candidate: Optional[CandidateUpdate] = None

    @property
    def applied(self) -> bool:
        return self.decision != REJECTED


def _accept(c: CandidateUpdate, reason="") -> StepOutcome:
    return StepOutcome(ACCEPTED, reason, c.nu_hat_p, c.xi_hat_p, c)


def _reject(c: Optional[CandidateUpdate], reason: str) -> StepOutcome:
    return StepOutcome(REJECTED, reason, None, None, c)


def ideal_decide(c: CandidateUpdate) -> StepOutcome:
    return _accept(c)


def clipping_decide(c: CandidateUpdate) -> StepOutcome:
    if c.xi_hat_p > 0.0:
        return _accept(c)
    return StepOutcome(MODIFIED, f"xi_hat={c.xi_hat_p:.3g} <= 0, reset to flat zero-mean message", 0.0, 0.0, c)


def acrevamp_decide(c: CandidateUpdate) -> StepOutcome:
    """Constrained moment matching: clamp to zero precision, keep the tilted mean."""
    tau_r = c.extrinsic.var
    if not tau_r > 0.0:
        raise InvariantError(f"extrinsic variance {tau_r!r} <= 0 at symbol {c.n}")
    if c.xi_hat_p > 0.0:
        return _accept(c)
    nu = (c.tilted_mean - c.extrinsic.mean) / tau_r
    return StepOutcome(MODIFIED, f"xi_hat={c.xi_hat_p:.3g} <= 0, clamped to xi=0", nu, 0.0, c)


def _check_mode(mode):
    if mode not in (STRICT, RELAXED):
        raise InvalidParameterError(f"mode must be 'strict' or 'relaxed', got {mode!r}")


def persistent_check(extrinsic: Gaussian1D, mode: str, prior: MixturePrior) -> bool:
    """Whether the persistent rule lets the current symbol be updated."""
    _check_mode(mode)
    if mode == STRICT:
        return is_belief_proper(prior, extrinsic)
    return extrinsic.var > 0.0


def persistent_decide(c: CandidateUpdate, mode: str, prior: MixturePrior) -> StepOutcome:
    if persistent_check(c.extrinsic, mode, prior):
        return _accept(c)
    return _reject(c, f"{mode} check failed for tau_r={c.extrinsic.var:.3g}")


@dataclass(frozen=True)
class LookAhead:
    """Extrinsics of every symbol after a tentative update, in natural form.

    ``precision[n]`` is ``1/tau_r_n`` and ``shift[n]`` is ``mu_r_n/tau_r_n``;
    a precision of exactly zero means an infinite-variance extrinsic.
    ``pd`` is False when the tentative belief precision is not positive definite.
    """

    pd: bool
    precision: np.ndarray = None
    shift: np.ndarray = None


def nonpersistent_decide(c: CandidateUpdate, mode: str, view) -> StepOutcome:
    """One-step look-ahead rule.

    ``view`` must provide ``look_ahead(candidate) -> LookAhead`` and
    ``priors`` (sequence of :class:`MixturePrior`).
    """
    _check_mode(mode)
    ahead = view.look_ahead(c)
    if not ahead.pd:
        return _reject(c, "tentative belief precision not positive definite")
    priors: Sequence[MixturePrior] = view.priors
    for n, rho in enumerate(ahead.precision):
        ok = is_tilt_proper(priors[n], rho) if mode == STRICT else rho > 0.0
        if not ok:
            return _reject(c, f"{mode} look-ahead failed at symbol {n} (1/tau_r={rho:.3g})")
    return _accept(c)


class Strategy:
    """Named decision rule consulted by the engine at every step."""

    name = "base"
    #: strategy guarantees every extrinsic variance stays positive
    positive_extrinsics = False

    def precheck(self, n: int, extrinsic: Gaussian1D, prior: MixturePrior) -> Optional[str]:
        """Called before the tilted moments are computed.

        Returns a rejection reason, or None to proceed.
        """
        return None

    def decide(self, c: CandidateUpdate, view) -> StepOutcome:
        raise NotImplementedError

    def __repr__(self):
        return f"<Strategy {self.name}>"


class Ideal(Strategy):
    name = "ideal"

    def decide(self, c, view):
        return ideal_decide(c)


class Clip(Strategy):
    name = "clip"

    def decide(self, c, view):
        return clipping_decide(c)


class ACreVAMP(Strategy):
    name = "acrevamp"
    positive_extrinsics = True

    def precheck(self, n, extrinsic, prior):
        if not extrinsic.var > 0.0:
            raise InvariantError(f"extrinsic variance {extrinsic.var!r} <= 0 at symbol {n}")
        return None

    def decide(self, c, view):
        return acrevamp_decide(c)


class Persistent(Strategy):
    def __init__(self, mode: str):
        _check_mode(mode)
        self.mode = mode
        self.name = f"persistent-{mode}"

    def precheck(self, n, extrinsic, prior):
        if persistent_check(extrinsic, self.mode, prior):
            return None
        return f"{self.mode} check failed for tau_r={extrinsic.var:.3g}"

    def decide(self, c, view):
        # the properness check already ran in precheck
        return _accept(c)


class NonPersistent(Strategy):
    def __init__(self, mode: str):
        _check_mode(mode)
        self.mode = mode
        self.name = f"nonpersistent-{mode}"

    def decide(self, c, view):
        return nonpersistent_decide(c, self.mode, view)


STRATEGY_NAMES = (
    "ideal",
    "clip",
    "persistent-strict",
    "persistent-relaxed",
    "nonpersistent-strict",
    "nonpersistent-relaxed",
    "acrevamp",
)


def get_strategy(name: str) -> Strategy:
    table = {
        "ideal": Ideal,
        "clip": Clip,
        "acrevamp": ACreVAMP,
        "persistent-strict": lambda: Persistent(STRICT),
        "persistent-relaxed": lambda: Persistent(RELAXED),
        "nonpersistent-strict": lambda: NonPersistent(STRICT),
        "nonpersistent-relaxed": lambda: NonPersistent(RELAXED),
    }
    try:
        return table[name]()
    except KeyError:
        raise InvalidParameterError(
            f"unknown strategy {name!r}; expected one of {', '.join(STRATEGY_NAMES)}"
        ) from None


def kld_objective(mu_p: float, tau_p: float, tilted_mean: float, tilted_var: float, mu_r: float, tau_r: float) -> float:
    """KL objective (up to constants) of projecting the tilted belief onto
    ``N(x|mu_r, tau_r) N(x|mu_p, tau_p)`` with ``tau_p > 0``."""
    var = tau_p * tau_r / (tau_p + tau_r)
    mean = (tau_p * mu_r + tau_r * mu_p) / (tau_p + tau_r)
    return 0.5 * math.log(var) + (tilted_var + (tilted_mean - mean) ** 2) / (2.0 * var)


def mean_matching_mu_p(tau_p: float, tilted_mean: float, mu_r: float, tau_r: float) -> float:
    """Message mean that makes the combined Gaussian reproduce ``tilted_mean``."""
    return ((tau_p + tau_r) * tilted_mean - tau_p * mu_r) / tau_r
