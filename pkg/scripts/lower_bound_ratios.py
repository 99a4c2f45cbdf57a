"""Replay the block family against its adaptive adversary and print exact ratios.

    python3 scripts/lower_bound_ratios.py --k 2..6
"""

import argparse
from fractions import Fraction

from housealloc.adversary import thm9_adversary
from housealloc.baseline import competitive_ratio, format_ratio, opt_nextbest
from housealloc.cli import parse_range
from housealloc.elicit import certify, elicit_rm_nextbest


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--k", type=parse_range, default=parse_range("2..6"))
    args = ap.parse_args()
    print(f"{'k':>3} {'n':>3} {'queries':>8} {'opt':>5}  ratio")
    for k in args.k:
        adv = thm9_adversary(k)
        trace = elicit_rm_nextbest(adv)
        committed = adv.commit()
        opt = opt_nextbest(committed, "nrm", max_agents=2 * k + 1)
        r = competitive_ratio(trace, opt)
        closed_form = Fraction(3, 2) - Fraction(3, 8 * k + 6)
        ok = "ok" if r == closed_form and certify(trace) else "MISMATCH"
        print(f"{k:>3} {2 * k + 1:>3} {trace.query_count:>8} {opt.opt_count:>5}  {format_ratio(r)} {ok}")


if __name__ == "__main__":
    main()
