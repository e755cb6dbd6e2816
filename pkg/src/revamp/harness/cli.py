"""Command line entry point: ``revamp run | verify | oracle``."""

from __future__ import annotations

import argparse
import logging
import sys
import time

from ..errors import ConfigError, RevampError
from .config import load_config
from .experiment import generate_instance, run_experiment

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


def _strategies(text):
    return tuple(s.strip() for s in text.split(",") if s.strip())


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="revamp", description="EP / reVAMP benchmarks on linear Gaussian-mixture models")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an SNR sweep and write CSV summaries")
    r.add_argument("--config", required=True, help="config file, or the name of a bundled preset (sparse.cfg, bpsk.cfg)")
    r.add_argument("--seed", type=int, help="override master_seed")
    r.add_argument("--out", help="override output_path")
    r.add_argument("--strategies", type=_strategies, help="comma separated strategy names")
    r.add_argument("--instances", type=int, help="override instances_per_snr")
    r.add_argument("--threads", type=int, default=1, help="worker processes (REVAMP_THREADS overrides)")

    v = sub.add_parser("verify", help="randomized invariant checks on small instances")
    v.add_argument("--seed", type=int, default=0)

    o = sub.add_parser("oracle", help="time the brute-force oracle alone")
    o.add_argument("--config", required=True)
    o.add_argument("--instances", type=int, default=20, help="instances per SNR level to time")
    return p


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    cfg = cfg.with_overrides(master_seed=args.seed, output_path=args.out, strategies=args.strategies,
                             instances_per_snr=args.instances)
    t0 = time.perf_counter()
    report, paths = run_experiment(cfg, threads=args.threads)
    print(f"{'snr_db':>7} {'strategy':<22} {'nmse_db':>9} {'failed':>6} {'nonconv':>7}")
    for row in report.rows:
        print(f"{row.snr_db:7g} {row.strategy:<22} {row.nmse_db:9.2f} {row.n_failed:6d} {row.n_nonconverged:7d}")
    print(f"wrote {', '.join(str(p) for p in paths.values())} in {time.perf_counter() - t0:.1f} s")
    return EXIT_OK


def cmd_verify(args) -> int:
    from ..verify import run_all

    results = run_all(args.seed)
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_RUNTIME


def cmd_oracle(args) -> int:
    from ..oracles import brute_force_mmse

    cfg = load_config(args.config)
    for l, snr in enumerate(cfg.snr_grid_db):
        times = []
        for i in range(args.instances):
            problem, _ = generate_instance(cfg, l, i)
            t0 = time.perf_counter()
            brute_force_mmse(problem)
            times.append(time.perf_counter() - t0)
        print(f"snr {snr:g} dB: {len(times)} oracle calls, mean {1e3 * sum(times) / len(times):.2f} ms")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "verify": cmd_verify, "oracle": cmd_oracle}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (RevampError, ArithmeticError, OSError) as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
