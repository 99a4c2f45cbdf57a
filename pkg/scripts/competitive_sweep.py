"""Empirical competitive ratios of the rank-maximal algorithms on random profiles.

    python3 scripts/competitive_sweep.py --n 3,4 --count 200 --seed 0
"""

import argparse
import statistics
from fractions import Fraction

from housealloc.adversary import random_profile
from housealloc.baseline import competitive_ratio, opt_hybrid, opt_nextbest
from housealloc.cli import parse_range
from housealloc.elicit import QueryOracle, elicit_rm_hybrid, elicit_rm_nextbest

SETUPS = {
    "rm-nextbest": ("next-best", elicit_rm_nextbest, opt_nextbest, Fraction(3, 2)),
    "rm-hybrid": ("hybrid", elicit_rm_hybrid, opt_hybrid, Fraction(6)),
}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=parse_range, default=[3, 4])
    ap.add_argument("--count", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    for name, (model, alg, opt_fn, bound) in SETUPS.items():
        for n in args.n:
            ratios = []
            for i in range(args.count):
                p = random_profile(n, args.seed + i)
                r = competitive_ratio(alg(QueryOracle(p, model)), opt_fn(p, "nrm"))
                if r is not None:
                    ratios.append(r)
            over = sum(r > bound for r in ratios)
            print(f"{name:12s} n={n} samples={len(ratios):4d} mean={float(statistics.mean(ratios)):.4f} "
                  f"max={max(ratios)} bound={bound} above_bound={over}")


if __name__ == "__main__":
    main()
