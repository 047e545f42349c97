"""Decompose every shipped fixture and print one summary row per tensor.

    python3 scripts/run_examples.py            # all fixtures
    python3 scripts/run_examples.py --skip-slow
"""

import argparse
import time

from xdecomp import fixtures
from xdecomp.decompose import SolverConfig, decompose
from xdecomp.tensor import max_flattening_rank, norm
from xdecomp.variety import membership

SLOW = {"curve_p4"}
MEMBERSHIP_ONLY = {"membership_cubic", "membership_quartic"}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--skip-slow", action="store_true", help="leave out the P^4 curve (about a minute)")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--restarts", type=int, default=50)
    args = ap.parse_args()

    header = f"{'fixture':<20}{'member':>7}{'flat':>5}{'rank':>5}{'tried':>14}{'||A||coef':>12}" \
             f"{'abs_err':>10}{'rel_err':>10}{'time':>7}"
    print(header)
    print("-" * len(header))
    for name in fixtures.names():
        if args.skip_slow and name in SLOW:
            continue
        A, X = fixtures.load(name)
        member = membership(A, X).member
        flat = max_flattening_rank(A)
        if name in MEMBERSHIP_ONLY or not member:
            print(f"{name:<20}{str(member):>7}{flat:>5}")
            continue
        cfg = SolverConfig(seed=args.seed, restarts=args.restarts,
                           rank_max=10 if name in SLOW else None)
        t0 = time.perf_counter()
        res = decompose(A, X, cfg)
        dt = time.perf_counter() - t0
        tried = ",".join(f"{a.rank}{'+' if a.ok else '-'}" for a in res.trace)
        rank = res.rank_used if res.success else "-"
        print(f"{name:<20}{str(member):>7}{flat:>5}{rank!s:>5}{tried:>14}{norm(A, 'coefficient'):>12.2f}"
              f"{res.abs_error:>10.1e}{res.rel_error:>10.1e}{dt:>6.1f}s")


if __name__ == "__main__":
    main()
