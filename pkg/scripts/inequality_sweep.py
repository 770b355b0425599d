"""Sweep random weights on the pants/dual filling pair and report the ratios
i(lam, mu) / (l_g(lam) min(l_g(lam), h0)) at the point g with E_l^lam(g) = E_r^mu(g).

    python scripts/inequality_sweep.py --n 50 --seed 0 --out out/sweep

Set EARTHQUAKE_LAB_THREADS to solve samples in parallel.
"""

import argparse
import csv
import json
import logging
from pathlib import Path

from earthquake_lab.estimates import main_estimate_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--n", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--weights", type=float, nargs=2, default=(0.2, 1.0), metavar=("LO", "HI"))
    ap.add_argument("--out", default="out/sweep")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    report = main_estimate_sweep(args.n, tuple(args.weights), args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "sweep.json").write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    with (out / "sweep.csv").open("w", newline="") as fh:
        csv.writer(fh).writerows(report.csv_rows())
    print(f"{len(report.samples)} samples, {report.excluded} excluded, all ratios positive: {report.all_positive()}")
    for h0, stats in report.aggregate()["lambda"].items():
        print(f"  h0 = {h0}: min ratio {stats['min']:.4g}, median {stats['median']:.4g}")
    print(f"report written to {out}/")


if __name__ == "__main__":
    main()
