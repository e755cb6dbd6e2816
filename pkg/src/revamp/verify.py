"""Randomized invariant checks on small instances, run by ``revamp verify``."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List

import numpy as np

from .engine import LinearProblem, compute_belief, compute_extrinsics, extrinsic_leave_one_out, run
from .errors import RevampError
from .gaussian import Gaussian1D
from .oracles import brute_force_mmse, lmmse
from .priors import MixturePrior, quadrature_moments, second_moment
from .strategies import ACCEPTED, STRATEGY_NAMES, get_strategy, kld_objective, mean_matching_mu_p

SPIKE_SLAB = MixturePrior([0.8, 0.2], [0.0, 0.0], [1e-2, 5.0])


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def random_problem(rng, priors, M, snr_db) -> LinearProblem:
    N = len(priors)
    A = rng.normal(0.0, 1.0 / math.sqrt(N), (M, N))
    x = np.array([p.means[k] + math.sqrt(p.vars[k]) * rng.normal()
                  for p, k in ((p, rng.choice(p.n_components, p=p.weights)) for p in priors)])
    noise_var = sum(second_moment(p) for p in priors) / N / 10 ** (snr_db / 10)
    return LinearProblem(A, A @ x + rng.normal(0, math.sqrt(noise_var), M), noise_var, priors)


def scenario(rng, kind, snr_db=None):
    snr = float(rng.choice(np.arange(0, 55, 5))) if snr_db is None else snr_db
    if kind == "sparse":
        return random_problem(rng, [MixturePrior.sparse(n + 1) for n in range(10)], 8, snr)
    if kind == "bpsk":
        return random_problem(rng, [MixturePrior.bpsk()] * 10, 20, snr)
    if kind == "spike":
        return random_problem(rng, [SPIKE_SLAB] * 10, 8, snr)
    raise ValueError(kind)


def check_gaussian_exactness(rng, runs=10):
    worst = 0.0
    for _ in range(runs):
        priors = [MixturePrior.gaussian(rng.normal(), 10 ** rng.uniform(-1, 1)) for _ in range(10)]
        pb = random_problem(rng, priors, 8, 20.0)
        exact = lmmse(pb).mean
        for name in STRATEGY_NAMES:
            rep = run(pb, get_strategy(name), max_sweeps=2)
            worst = max(worst, float(np.max(np.abs(rep.x_hat - exact))))
    return CheckResult("gaussian exactness", worst < 1e-8, f"max |x_hat - exact| = {worst:.2e}")


def _runs(rng, runs, names, kinds, fn):
    for i in range(runs):
        pb = scenario(rng, kinds[i % len(kinds)])
        fn(pb, names[i % len(names)])


def check_pd_invariance(rng, runs=20):
    bad = 0

    def one(pb, name):
        def hook(before, after, out):
            nonlocal bad
            bad += np.linalg.eigvalsh(after.belief_cov)[0] <= 0

        run(pb, get_strategy(name), max_sweeps=20, on_step=hook)

    names = ["persistent-strict", "persistent-relaxed", "nonpersistent-strict", "nonpersistent-relaxed"]
    _runs(rng, runs, names, ["spike", "bpsk", "sparse"], one)
    return CheckResult("belief stays positive definite", bad == 0, f"{bad} violations in {runs} runs")


def check_acrevamp_invariant(rng, runs=20):
    bad = 0

    def one(pb, name):
        nonlocal bad

        def hook(before, after, out):
            nonlocal bad
            bad += int(np.any(after.xi_p < 0)) + int(np.any(~(after.tau_r > 0)))

        try:
            run(pb, get_strategy(name), max_sweeps=20, on_step=hook)
        except RevampError:
            bad += 1

    _runs(rng, runs, ["acrevamp"], ["sparse", "bpsk"], one)
    return CheckResult("acrevamp keeps xi >= 0 and tau_r > 0", bad == 0, f"{bad} violations in {runs} runs")


def check_extrinsic_forms(rng, draws=100):
    worst = 0.0
    for _ in range(draws):
        pb = scenario(rng, ["sparse", "bpsk"][int(rng.integers(2))])
        xi = 10 ** rng.uniform(-1, 2, pb.N)
        nu = rng.normal(0, 1, pb.N) * xi
        mu_r, tau_r = compute_extrinsics(compute_belief(pb, nu, xi), nu, xi)
        n = int(rng.integers(pb.N))
        g = extrinsic_leave_one_out(pb, nu, xi, n)
        worst = max(worst, abs(g.var - tau_r[n]) / abs(g.var), abs(g.mean - mu_r[n]) / max(abs(g.mean), 1e-300))
    return CheckResult("extrinsic belief form = leave-one-out form", worst < 1e-8, f"max rel dev = {worst:.2e}")


def check_rank_one(rng, steps=100):
    pb = scenario(rng, "bpsk", 5.0)
    worst = 0.0

    def hook(before, after, out):
        nonlocal worst
        ref = compute_belief(pb, after.nu_p, after.xi_p).cov
        worst = max(worst, float(np.linalg.norm(after.belief_cov - ref) / np.linalg.norm(ref)))

    run(pb, get_strategy("nonpersistent-relaxed"), max_sweeps=steps // pb.N, tol=0.0, on_step=hook)
    return CheckResult("rank-one updates track full recompute", worst < 1e-8, f"max rel Frobenius = {worst:.2e}")


def check_determinant_ratio(rng, runs=5):
    worst = 0.0

    def hook(before, after, out):
        nonlocal worst
        if out.decision != ACCEPTED:
            return
        ratio = math.exp(np.linalg.slogdet(before.belief_cov)[1] - np.linalg.slogdet(after.belief_cov)[1])
        c = out.candidate
        worst = max(worst, abs(ratio / (before.belief_cov[c.n, c.n] / c.tilted_var) - 1))

    for _ in range(runs):
        run(scenario(rng, "sparse"), get_strategy("persistent-strict"), max_sweeps=20, on_step=hook)
    return CheckResult("determinant ratio of accepted steps", worst < 1e-7, f"max rel dev = {worst:.2e}")


def check_oracle(rng, draws=30):
    worst = 0.0
    for _ in range(draws):
        a, noise, y = float(rng.normal()), float(10 ** rng.uniform(-3, 0)), float(rng.normal(0, 1.5))
        prior = MixturePrior.bpsk()
        est = brute_force_mmse(LinearProblem(np.array([[a]]), np.array([y]), noise, [prior]))
        q = quadrature_moments(prior, Gaussian1D(y / a, noise / a**2))
        worst = max(worst, abs(est.mean[0] - q.mean), abs(est.cov[0, 0] - q.var))
    return CheckResult("brute-force oracle vs quadrature", worst < 1e-8, f"max abs dev = {worst:.2e}")


def check_kld_monotone(rng, draws=30):
    bad = 0
    grid = np.logspace(4, -8, 80)
    for _ in range(draws):
        tau_r = float(10 ** rng.uniform(-3, 1))
        tilted_var = tau_r * float(10 ** rng.uniform(1e-3, 2))  # tilted wider than extrinsic: xi_hat < 0
        mu_r, tilted_mean = float(rng.normal()), float(rng.normal())
        vals = [kld_objective(mean_matching_mu_p(1 / x, tilted_mean, mu_r, tau_r), 1 / x, tilted_mean, tilted_var, mu_r, tau_r)
                for x in grid]
        bad += int(np.any(np.diff(vals) >= 0))
    return CheckResult("clamped objective decreases toward xi = 0", bad == 0, f"{bad} counterexamples")


CHECKS: List[Callable] = [
    check_gaussian_exactness,
    check_pd_invariance,
    check_acrevamp_invariant,
    check_extrinsic_forms,
    check_rank_one,
    check_determinant_ratio,
    check_oracle,
    check_kld_monotone,
]


def run_all(seed: int = 0, echo: Callable[[str], None] = print) -> List[CheckResult]:
    results = []
    for i, check in enumerate(CHECKS):
        rng = np.random.default_rng([seed, i])
        try:
            res = check(rng)
        except Exception as e:  # a crash is a failed check, not a crashed suite
            res = CheckResult(check.__name__, False, f"{type(e).__name__}: {e}")
        echo(res.line())
        results.append(res)
    return results
