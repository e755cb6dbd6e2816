"""A single BPSK symbol observed at 0 with a tight extrinsic.

The tilted belief is bimodal and wider than the extrinsic, so the moment
matched message has negative precision. Prints how every strategy handles
it, runs all strategies on a two-symbol problem built around it, and then on
a spike-and-slab instance where the unprotected update breaks the belief.
"""

import numpy as np

from revamp.engine import LinearProblem, run
from revamp.errors import RevampError
from revamp.gaussian import Gaussian1D
from revamp.priors import MixturePrior, posterior_moments
from revamp.verify import SPIKE_SLAB, random_problem
from revamp.strategies import STRATEGY_NAMES, CandidateUpdate, get_strategy

prior = MixturePrior.bpsk()
extrinsic = Gaussian1D(0.0, 0.01)
tilted = posterior_moments(prior, extrinsic)
c = CandidateUpdate.from_moments(0, tilted, extrinsic)
print(f"extrinsic N({extrinsic.mean}, {extrinsic.var}), tilted N({tilted.mean:.3g}, {tilted.var:.4g})")
print(f"candidate message precision xi_hat = {c.xi_hat_p:.4g}\n")



def run_all(pb):
    for name in STRATEGY_NAMES:
        try:
            rep = run(pb, get_strategy(name))
            print(f"{name:<22} x_hat[:3]={np.round(rep.x_hat[:3], 4)} sweeps={rep.sweeps_run} "
                  f"converged={rep.converged} rejected={rep.rejected_updates} modified={rep.modified_updates}")
        except RevampError as e:
            print(f"{name:<22} failed: {type(e).__name__}: {e}")


run_all(LinearProblem(np.eye(2), np.array([0.0, 1.0]), 0.01, [prior, prior]))
print("\nspike-and-slab, 8x10, 5 dB")
run_all(random_problem(np.random.default_rng(38), [SPIKE_SLAB] * 10, 8, 5.0))
