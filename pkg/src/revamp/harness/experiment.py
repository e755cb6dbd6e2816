"""Instance generation, the SNR sweep and NMSE aggregation."""

from __future__ import annotations

import csv
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..engine import LinearProblem, run
from ..errors import RevampError
from ..oracles import brute_force_mmse, lmmse
from ..priors import second_moment
from ..strategies import get_strategy
from .config import ExperimentConfig

log = logging.getLogger(__name__)

SUMMARY_COLUMNS = ["snr_db", "strategy", "nmse", "nmse_db", "n_instances", "n_failed", "n_nonconverged"]
RUN_COLUMNS = [
    "snr_db", "instance_id", "strategy", "failed", "error", "converged", "sweeps_run",
    "rejected_updates", "modified_updates", "sq_err", "mmse_energy", "x_hat", "x_mmse",
]


@dataclass
class RunRecord:
    snr_db: float
    instance_id: int
    strategy: str
    x_hat: Optional[np.ndarray]
    x_mmse: np.ndarray
    sweeps_run: int
    converged: bool
    rejected_updates: int
    wall_time: float
    modified_updates: int = 0
    error: str = ""

    @property
    def failed(self) -> bool:
        return self.x_hat is None

    @property
    def sq_err(self) -> float:
        return math.nan if self.failed else float(np.sum((self.x_hat - self.x_mmse) ** 2))


@dataclass
class NmseRow:
    snr_db: float
    strategy: str
    nmse: float
    n_instances: int
    n_failed: int
    n_nonconverged: int

    @property
    def nmse_db(self) -> float:
        if math.isnan(self.nmse):
            return math.nan
        return 10 * math.log10(self.nmse) if self.nmse > 0 else -math.inf


@dataclass
class NmseReport:
    rows: List[NmseRow]

    def get(self, snr_db, strategy) -> NmseRow:
        for r in self.rows:
            if r.snr_db == snr_db and r.strategy == strategy:
                return r
        raise KeyError((snr_db, strategy))

    def curve(self, strategy) -> List[Tuple[float, float]]:
        return [(r.snr_db, r.nmse) for r in self.rows if r.strategy == strategy]


def noise_variance(priors, snr_db: float) -> float:
    """sigma^2 such that E||Ax||^2 / (M sigma^2) hits ``snr_db`` for A ~ N(0, 1/N)."""
    N = len(priors)
    power = sum(second_moment(p) for p in priors) / N
    return power / 10 ** (snr_db / 10)


def instance_rng(master_seed: int, snr_index: int, instance_id: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([master_seed, snr_index, instance_id]))


def generate_instance(config: ExperimentConfig, snr_index: int, instance_id: int):
    """Draw ``(problem, true_x)`` for one (SNR level, instance) pair."""
    rng = instance_rng(config.master_seed, snr_index, instance_id)
    priors = config.priors()
    M, N = config.M, config.N
    A = rng.normal(0.0, 1.0 / math.sqrt(N), (M, N))
    x = np.empty(N)
    for n, p in enumerate(priors):
        k = rng.choice(p.n_components, p=p.weights)
        x[n] = p.means[k] + math.sqrt(p.vars[k]) * rng.normal()
    noise_var = noise_variance(priors, config.snr_grid_db[snr_index])
    y = A @ x + rng.normal(0.0, math.sqrt(noise_var), M)
    return LinearProblem(A, y, noise_var, priors), x


def run_instance(config: ExperimentConfig, snr_index: int, instance_id: int) -> List[RunRecord]:
    problem, _ = generate_instance(config, snr_index, instance_id)
    snr = config.snr_grid_db[snr_index]
    t0 = time.perf_counter()
    x_mmse = brute_force_mmse(problem).mean
    records = [RunRecord(snr, instance_id, "mmse", x_mmse, x_mmse, 0, True, 0, time.perf_counter() - t0)]
    for name in config.strategies:
        t0 = time.perf_counter()
        if name == "lmmse":
            records.append(RunRecord(snr, instance_id, name, lmmse(problem).mean, x_mmse, 0, True, 0, 0.0))
            records[-1].wall_time = time.perf_counter() - t0
            continue
        try:
            rep = run(problem, get_strategy(name), max_sweeps=config.max_sweeps, tol=config.tol)
        except RevampError as e:
            log.debug("%s failed on snr=%s instance=%d: %s", name, snr, instance_id, e)
            records.append(RunRecord(snr, instance_id, name, None, x_mmse, 0, False, 0,
                                     time.perf_counter() - t0, error=type(e).__name__))
            continue
        records.append(RunRecord(snr, instance_id, name, rep.x_hat, x_mmse, rep.sweeps_run, rep.converged,
                                 rep.rejected_updates, time.perf_counter() - t0, rep.modified_updates))
    return records


def _task(args):
    return run_instance(*args)


def resolve_threads(threads: Optional[int] = None) -> int:
    env = os.environ.get("REVAMP_THREADS")
    if env:
        threads = int(env)
    return max(1, threads or 1)


def collect(config: ExperimentConfig, threads: Optional[int] = None) -> List[RunRecord]:
    """All run records in (snr, instance, strategy) order, independent of ``threads``."""
    tasks = [(config, l, i) for l in range(len(config.snr_grid_db)) for i in range(config.instances_per_snr)]
    threads = resolve_threads(threads)
    if threads == 1:
        chunks = map(_task, tasks)
        return [r for chunk in chunks for r in chunk]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        chunks = pool.map(_task, tasks, chunksize=max(1, len(tasks) // (4 * threads)))
        return [r for chunk in chunks for r in chunk]


def aggregate(config: ExperimentConfig, records: Sequence[RunRecord]) -> NmseReport:
    acc: Dict[Tuple[float, str], list] = {}
    for r in records:
        if r.strategy == "mmse":
            continue
        a = acc.setdefault((r.snr_db, r.strategy), [0.0, 0.0, 0, 0, 0])
        a[2] += 1
        if r.failed:
            a[3] += 1
            continue
        a[0] += r.sq_err
        a[1] += float(r.x_mmse @ r.x_mmse)
        if not r.converged:
            a[4] += 1
    rows = []
    for snr in config.snr_grid_db:
        for name in config.strategies:
            err, energy, n, failed, nonconv = acc[(snr, name)]
            nmse = err / energy if n > failed and energy > 0 else math.nan
            rows.append(NmseRow(snr, name, nmse, n, failed, nonconv))
    return NmseReport(rows)


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _vec(x) -> str:
    return "" if x is None else ";".join(repr(float(v)) for v in x)


def write_outputs(config: ExperimentConfig, records, report: NmseReport, out_dir) -> Dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"runs": out / "runs.csv", "timing": out / "timing.csv", "summary": out / "summary.csv"}
    with open(paths["runs"], "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(RUN_COLUMNS)
        for r in records:
            if r.strategy == "mmse":
                continue
            energy = float(r.x_mmse @ r.x_mmse)
            w.writerow([_fmt(r.snr_db), r.instance_id, r.strategy, _fmt(r.failed), r.error, _fmt(r.converged),
                        r.sweeps_run, r.rejected_updates, r.modified_updates, _fmt(r.sq_err), _fmt(energy),
                        _vec(r.x_hat), _vec(r.x_mmse)])
    with open(paths["timing"], "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["snr_db", "instance_id", "strategy", "wall_time"])
        for r in records:
            w.writerow([_fmt(r.snr_db), r.instance_id, r.strategy, _fmt(r.wall_time)])
    with open(paths["summary"], "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for row in report.rows:
            w.writerow([_fmt(row.snr_db), row.strategy, _fmt(row.nmse), _fmt(row.nmse_db),
                        row.n_instances, row.n_failed, row.n_nonconverged])
    if config.svg:
        from .svg import nmse_chart

        paths["svg"] = out / "nmse.svg"
        title = f"{config.scenario} {config.M}x{config.N}, {config.instances_per_snr} instances per SNR"
        paths["svg"].write_text(nmse_chart(report, config.strategies, title))
    return paths


def run_experiment(config: ExperimentConfig, threads: Optional[int] = None, out_dir=None):
    """Run the sweep; write CSVs under ``out_dir`` (default ``config.output_path``)."""
    records = collect(config, threads)
    report = aggregate(config, records)
    paths = write_outputs(config, records, report, out_dir or config.output_path)
    return report, paths
