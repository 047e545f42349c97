"""Planted Vandermonde instances over a grid of (k, d, r), decomposed at the planted rank.

Writes one CSV row per trial (k, n, d, r, time, rel_error, seed, success) and
prints a per-row summary.

    python3 scripts/bench_segre.py --rows 2,3,4 2,4,5 3,3,7 --trials 5 --out bench.csv
"""

import argparse
import csv
import sys

from xdecomp.decompose import SolverConfig
from xdecomp.vandermonde import bench

DEFAULT_ROWS = ["2,3,4", "2,4,5", "3,3,7", "2,5,6", "3,4,9"]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", nargs="+", default=DEFAULT_ROWS, help="k,d,r triples")
    ap.add_argument("--trials", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--restarts", type=int, default=50)
    ap.add_argument("--out", help="CSV file (default: stdout)")
    args = ap.parse_args()

    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.writer(fh)
    w.writerow(["k", "n", "d", "r", "time", "rel_error", "seed", "success"])
    summary = []
    for spec in args.rows:
        k, d, r = (int(x) for x in spec.split(","))
        rows = bench(k, d, r, args.trials, seed=args.seed, cfg=SolverConfig(restarts=args.restarts))
        for row in rows:
            w.writerow([row.k, row.n, row.d, row.r, f"{row.time:.3f}", f"{row.rel_error:.3e}", row.seed,
                        int(row.success)])
        if rows:
            wins = sum(row.success for row in rows)
            mean_t = sum(row.time for row in rows) / len(rows)
            worst = max(row.rel_error for row in rows)
            summary.append(f"k={k} n={2 ** k - 1} d={d} r={r}: {wins}/{len(rows)} ok, "
                           f"mean {mean_t:.2f}s, worst rel_error {worst:.1e}")
    if fh is not sys.stdout:
        fh.close()
    for line in summary:
        print(line, file=sys.stderr)


if __name__ == "__main__":
    main()
