"""Follow the fixed point of E_l^{t mu} o E_l^{t lam} from k0 (t = 0) to t = T.

    python scripts/fixed_point_path.py --t 1.0 --steps 32 --out out/path.csv

Uses the pants multicurve (lambda) and the dual multicurve (mu) with the
given weights, prints the residual report and writes the t-path as CSV.
"""

import argparse
import csv
import json
import logging
from pathlib import Path

from earthquake_lab.fixed_point import continuation_solve
from earthquake_lab.fixtures import dual_multicurve, pants_multicurve


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--t", type=float, default=1.0)
    ap.add_argument("--steps", type=int, default=32)
    ap.add_argument("--lambda-weights", type=float, nargs=3, default=(1.0, 1.0, 1.0))
    ap.add_argument("--mu-weights", type=float, nargs=3, default=(1.0, 1.0, 1.0))
    ap.add_argument("--out", default="out/fixed_point_path.csv")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    lam, mu = pants_multicurve(args.lambda_weights), dual_multicurve(args.mu_weights)
    report = continuation_solve(lam, mu, args.t, steps=args.steps)
    summary = {k: v for k, v in report.to_dict().items() if k not in ("path", "t_path")}
    print(json.dumps(summary, indent=2))

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "l1", "l2", "l3", "tau1", "tau2", "tau3"])
        for t, v in zip(report.t_path, report.path):
            w.writerow([t, *map(float, v)])
    print(f"path written to {out}")


if __name__ == "__main__":
    main()
