"""Certified kappa for every down-up walk with N <= N_max, against the closed formula.

    python3 scripts/downup_sweep.py --N-max 8 --out results/downup.csv
"""

import argparse
import csv
import time
from fractions import Fraction
from pathlib import Path

from entcurv import build_nsets, certify_kappa, downup_theoretical_kappa, pair_set


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--N-max", type=int, default=8)
    ap.add_argument("--mode", default="exhaustive", choices=["exhaustive", "generator-edges"])
    ap.add_argument("--out", default="results/downup.csv")
    args = ap.parse_args()
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    rows = []
    for N in range(2, args.N_max + 1):
        for n in range(1, N):
            for k in range(1, n + 1):
                t0 = time.perf_counter()
                m = build_nsets(N, n, k)
                kappa = certify_kappa(m.kernels, m.theta, m.metric, pair_set(m.space.size, m.metric, args.mode)).kappa
                w = [0] * n
                w[k - 1] = 1
                ref = downup_theoretical_kappa(N, n, w)
                rows.append([N, n, k, m.space.size, str(kappa), str(ref), float(kappa - ref),
                             kappa > Fraction(k, n), round(time.perf_counter() - t0, 3)])
                print(f"N={N} n={n} k={k}: kappa={kappa} formula={ref}")
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["N", "n", "k", "states", "kappa", "formula", "kappa_minus_formula", "above_k_over_n", "seconds"])
        w.writerows(rows)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
