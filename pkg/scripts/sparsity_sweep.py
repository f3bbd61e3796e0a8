"""Success rate versus sparsity for the four solvers under one noise model.

    python scripts/sparsity_sweep.py --noise sas --trials 50 --threads 4 --out sweep_sas.csv

Equivalent to ``robustcs sweep scripts/configs/sweep_sas.cfg``; the CSV is
plot-ready (one row per K and method).
"""

import argparse
import os

from robustcs import bench

CONFIGS = {"gaussian": "sweep_gaussian.cfg", "gmm": "sweep_gmm.cfg", "sas": "sweep_sas.cfg"}


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--noise", choices=sorted(CONFIGS), default="sas")
    ap.add_argument("--trials", type=int)
    ap.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--out")
    args = ap.parse_args()

    spec = bench.load_config(os.path.join(os.path.dirname(__file__), "configs", CONFIGS[args.noise]))
    kw = {"threads": args.threads}
    if args.trials is not None:
        kw["trials"] = args.trials
    if args.seed is not None:
        kw["master_seed"] = args.seed
    spec = spec.with_(**kw)
    out = args.out or f"sweep_{args.noise}.csv"
    rows = bench.run_sparsity_sweep(spec, progress=lambda r: print(r.csv_line(), flush=True))
    bench.write_sweep_csv(rows, out)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
