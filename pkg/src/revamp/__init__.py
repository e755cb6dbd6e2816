"""Expectation propagation on linear models with Gaussian-mixture priors,
with strategies for handling negative-variance messages."""

from .engine import EstimateReport, LinearProblem, init_state, run, step
from .errors import (
    ConfigError,
    ImproperBeliefError,
    InvalidParameterError,
    InvariantError,
    RevampError,
    SingularExtrinsicError,
    SingularUpdateError,
    TooLargeError,
)
from .gaussian import Gaussian1D, GaussianNatural1D, GaussianND
from .oracles import brute_force_mmse, lmmse
from .priors import MixturePrior, posterior_moments, prior_moments
from .strategies import STRATEGY_NAMES, get_strategy

__version__ = "0.1.0"

__all__ = [
    "EstimateReport", "LinearProblem", "init_state", "run", "step",
    "ConfigError", "ImproperBeliefError", "InvalidParameterError", "InvariantError", "RevampError",
    "SingularExtrinsicError", "SingularUpdateError", "TooLargeError",
    "Gaussian1D", "GaussianNatural1D", "GaussianND",
    "brute_force_mmse", "lmmse",
    "MixturePrior", "posterior_moments", "prior_moments",
    "STRATEGY_NAMES", "get_strategy",
]
