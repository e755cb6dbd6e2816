"""Full SNR sweeps for both presets (11 levels, 500 instances each).

    python3 scripts/full_sweep.py --threads 4 --out results
"""

import argparse
import time
from pathlib import Path

from revamp.harness.config import load_config
from revamp.harness.experiment import run_experiment


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="results")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--instances", type=int, default=None, help="override instances per SNR")
    ap.add_argument("--seed", type=int, default=None)
    args = ap.parse_args()

    for name in ("sparse", "bpsk"):
        cfg = load_config(f"{name}.cfg").with_overrides(instances_per_snr=args.instances, master_seed=args.seed)
        t0 = time.perf_counter()
        report, paths = run_experiment(cfg, threads=args.threads, out_dir=Path(args.out) / name)
        print(f"== {name}: {time.perf_counter() - t0:.0f} s, {paths['summary']}")
        for s in cfg.snr_grid_db:
            cells = "  ".join(f"{r.strategy}={r.nmse_db:7.2f}" for r in report.rows if r.snr_db == s)
            print(f"{s:4g} dB  {cells}")


if __name__ == "__main__":
    main()
