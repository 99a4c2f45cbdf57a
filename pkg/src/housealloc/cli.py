"""Command-line harness: gen, run, verify, opt and bench.

Exit codes: 0 ok, 1 usage, 2 certification failure, 3 bound refusal.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from . import adversary as adv
from .baseline import competitive_ratio, opt_hybrid, opt_nextbest
from .core import StructureError, is_consistent
from .elicit import ALGORITHMS, Alg1Config, Oracle, QueryOracle, certify, run_algorithm
from .necessity import EnumerationBoundError, is_necessarily_optimal, npo_bruteforce, nrm_bruteforce, sd_certificate
from .serialize import (dumps, knowledge_from_json, matching_from_json, opt_to_json, profile_from_json,
                        profile_to_json, read_json, trace_from_json, trace_to_json, write_json)

EXIT_OK, EXIT_USAGE, EXIT_UNCERTIFIED, EXIT_BOUND = 0, 1, 2, 3

CSV_COLUMNS = ("instance_id", "family", "n", "model", "criterion", "algorithm", "queries",
               "opt_queries", "ratio", "ratio_decimal", "certified", "seed")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit with 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def parse_range(text: str) -> List[int]:
    """``"2..6"`` or ``"3,4"`` or ``"5"``."""
    try:
        if ".." in text:
            lo, hi = text.split("..")
            return list(range(int(lo), int(hi) + 1))
        return [int(x) for x in text.split(",") if x]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an integer range: {text!r}") from exc


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# gen


def cmd_gen(args) -> int:
    if args.family == "random":
        if args.n is None:
            raise UsageError("--n is required for the random family")
        p = adv.random_profile(args.n, args.seed)
        doc = profile_to_json(p, family="random", seed=args.seed)
    elif args.family == "thm9":
        if args.k is None:
            raise UsageError("--k is required for the thm9 family")
        special = args.special if args.special is not None else 2 * args.k
        p = adv.thm9_profile(args.k, special)
        doc = profile_to_json(p, family="thm9", k=args.k, special=special, adversary="thm9")
    else:
        if args.n is None:
            raise UsageError("--n is required for the thm8 family")
        st = adv.Thm8Structure.build(args.n, args.seed)
        p = adv.thm8_profile(args.n, args.seed)
        doc = profile_to_json(p, family="thm8", seed=args.seed, adversary="thm8",
                              roles={"first": list(st.first_agents), "second": list(st.second_agents),
                                     "special": list(st.special_agents)},
                              houses={"first": list(st.first_houses), "special": list(st.special_houses)})
    _emit(dumps(doc), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# run


def make_oracle(alg: str, profile=None, adversary: Optional[str] = None, k: Optional[int] = None,
                n: Optional[int] = None, seed: Optional[int] = 0, set_size: Optional[int] = None) -> Oracle:
    model = ALGORITHMS[alg][0]
    if adversary is None:
        return QueryOracle(profile, model, max_set_size=set_size)
    if adversary == "thm9":
        if model == "next-best":
            return adv.thm9_adversary(k)
        return adv.cor2_hybrid_adversary(k) if model == "hybrid" else adv.cor2_setcompare_adversary(k)
    if adversary == "thm8":
        return adv.thm8_adversary(n, model, seed)
    raise UsageError(f"unknown adversary {adversary!r}")


def _committed(oracle: Oracle):
    return oracle.hidden if isinstance(oracle, QueryOracle) else oracle.commit()


def cmd_run(args) -> int:
    profile = None
    if args.adversary is None:
        if not args.instance:
            raise UsageError("run needs --instance or --adversary")
        profile = profile_from_json(read_json(args.instance))
    elif args.adversary == "thm9" and args.k is None:
        raise UsageError("--k is required with --adversary thm9")
    elif args.adversary == "thm8" and args.n is None:
        raise UsageError("--n is required with --adversary thm8")
    set_size = args.k if args.alg == "po-setcompare-k" else None
    oracle = make_oracle(args.alg, profile, args.adversary, args.k, args.n, args.seed, set_size)
    cfg = Alg1Config(args.c0) if args.c0 is not None else None
    trace = run_algorithm(args.alg, oracle, k=args.k, cfg=cfg)
    truth = _committed(oracle)
    _emit(dumps(trace_to_json(trace, truth, seed=args.seed)), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify


def verify_doc(trace_doc: Dict, method: str = "poly") -> Dict:
    trace = trace_from_json(trace_doc)
    verdict = {"algorithm": trace.algorithm, "criterion": trace_doc["criterion"],
               "query_count": trace.query_count}
    consistent = True
    if "profile" in trace_doc:
        consistent = is_consistent(trace.knowledge, profile_from_json(trace_doc["profile"]))
    verdict["consistent"] = consistent
    verdict["certified"] = consistent and certify(trace, "bruteforce" if method == "bruteforce" else "poly")
    if trace_doc["criterion"] == "npo" and verdict["certified"]:
        verdict["certificate"] = list(sd_certificate(trace.knowledge, trace.matching))
    return verdict


def cmd_verify(args) -> int:
    if args.trace:
        verdict = verify_doc(read_json(args.trace), args.method)
    else:
        if not (args.knowledge and args.matching and args.criterion):
            raise UsageError("verify needs --trace, or --knowledge, --matching and --criterion")
        pk = knowledge_from_json(read_json(args.knowledge))
        m = matching_from_json(read_json(args.matching))
        if args.method == "bruteforce":
            ok = (npo_bruteforce if args.criterion == "npo" else nrm_bruteforce)(pk, m)
        else:
            ok = is_necessarily_optimal(pk, m, args.criterion)
        consistent = True
        if args.instance:
            consistent = is_consistent(pk, profile_from_json(read_json(args.instance)))
        verdict = {"criterion": args.criterion, "consistent": consistent, "certified": ok and consistent}
        if ok and args.criterion == "npo":
            verdict["certificate"] = list(sd_certificate(pk, m))
    _emit(dumps(verdict), args.out)
    return EXIT_OK if verdict["certified"] else EXIT_UNCERTIFIED


# ---------------------------------------------------------------------------
# opt


def cmd_opt(args) -> int:
    if not args.instance:
        raise UsageError("opt needs --instance")
    profile = profile_from_json(read_json(args.instance))
    if args.model == "next-best":
        res = opt_nextbest(profile, args.criterion, max_agents=args.bound or 6)
    elif args.model == "hybrid":
        res = opt_hybrid(profile, args.criterion, max_agents=args.bound or 4)
    else:
        raise UsageError("the offline optimum is only computed for the next-best and hybrid models")
    _emit(dumps(opt_to_json(res)), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# bench


@dataclass(frozen=True)
class BenchRow:
    instance_id: str
    family: str
    n: int
    model: str
    criterion: str
    algorithm: str
    queries: int
    opt_queries: Optional[int]
    ratio: Optional[str]
    ratio_decimal: Optional[str]
    certified: bool
    seed: Optional[int]


@dataclass(frozen=True)
class BenchCell:
    family: str
    alg: str
    param: int
    seed: Optional[int]
    opt_bound_nextbest: int
    opt_bound_hybrid: int
    c0: Optional[Fraction]
    k: Optional[int]


def _run_cell(cell: BenchCell):
    model, criterion = ALGORITHMS[cell.alg]
    set_size = cell.k if cell.alg == "po-setcompare-k" else None
    if cell.family == "random":
        profile = adv.random_profile(cell.param, cell.seed)
        oracle = make_oracle(cell.alg, profile, set_size=set_size)
        iid = f"random-n{cell.param}-s{cell.seed}"
    elif cell.family == "thm9":
        oracle = make_oracle(cell.alg, adversary="thm9", k=cell.param, set_size=set_size)
        iid = f"thm9-k{cell.param}"
    else:
        oracle = make_oracle(cell.alg, adversary="thm8", n=cell.param, seed=cell.seed, set_size=set_size)
        iid = f"thm8-n{cell.param}-s{cell.seed}"
    trace = run_algorithm(cell.alg, oracle, k=cell.k, cfg=Alg1Config(cell.c0) if cell.c0 else None)
    truth = _committed(oracle)
    n = truth.n
    certified = is_consistent(trace.knowledge, truth) and certify(trace)
    opt = None
    try:
        if model == "next-best" and n <= cell.opt_bound_nextbest:
            opt = opt_nextbest(truth, criterion, max_agents=cell.opt_bound_nextbest)
        elif model == "hybrid" and n <= cell.opt_bound_hybrid:
            opt = opt_hybrid(truth, criterion, max_agents=cell.opt_bound_hybrid)
    except EnumerationBoundError:
        opt = None
    ratio = competitive_ratio(trace, opt) if opt is not None else None
    row = BenchRow(iid, cell.family, n, model, criterion, cell.alg, trace.query_count,
                   opt.opt_count if opt else None,
                   None if ratio is None else f"{ratio.numerator}/{ratio.denominator}",
                   None if ratio is None else f"{float(ratio):.6f}",
                   certified, cell.seed)
    return row, trace_to_json(trace, truth, instance_id=iid, seed=cell.seed)


def cmd_bench(args) -> int:
    algs = args.alg.split(",") if args.alg else sorted(ALGORITHMS)
    for a in algs:
        if a not in ALGORITHMS:
            raise UsageError(f"unknown algorithm {a!r}")
    cells = []
    if args.family == "thm9":
        params = args.k_range or [2]
        for a in algs:
            for k in params:
                k_set = args.set_size if a == "po-setcompare-k" else None
                cells.append(BenchCell("thm9", a, k, None, args.opt_bound, 4, args.c0, k_set))
    else:
        sizes = args.n_range or [4]
        for a in algs:
            if args.family == "thm8" and ALGORITHMS[a][0] == "set-compare":
                continue
            for n in sizes:
                for i in range(args.count):
                    seed = args.seed + i
                    k = args.set_size if a == "po-setcompare-k" else None
                    # random profiles get the exhaustive-scale bound, not the structured one
                    cells.append(BenchCell(args.family, a, n, seed, min(args.opt_bound, 6), 4, args.c0, k))
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_run_cell, cells))
    else:
        results = [_run_cell(c) for c in cells]
    results.sort(key=lambda rt: (rt[0].algorithm, rt[0].family, rt[0].n, rt[0].instance_id))
    rows = [r for r, _ in results]
    out = Path(args.out) if args.out else None
    if out is not None:
        (out / "traces").mkdir(parents=True, exist_ok=True)
        for row, doc in results:
            path = out / "traces" / f"{row.algorithm}__{row.instance_id}.json"
            write_json(path, doc)
            # every stored trace must re-verify from disk
            if not verify_doc(read_json(path))["certified"]:
                rows[rows.index(row)] = BenchRow(**{**asdict(row), "certified": False})
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: ("" if v is None else v) for k, v in asdict(row).items()})
        (out / "bench.csv").write_text(buf.getvalue())
        (out / "bench.json").write_text(dumps({"columns": list(CSV_COLUMNS), "rows": [asdict(r) for r in rows]}))
    for row in rows:
        ratio = f"{row.ratio} ({row.ratio_decimal})" if row.ratio else "-"
        flag = "ok" if row.certified else "UNCERTIFIED"
        print(f"{row.algorithm:16s} {row.instance_id:24s} queries={row.queries:<5d} "
              f"opt={'-' if row.opt_queries is None else row.opt_queries:<5} ratio={ratio} {flag}")
    return EXIT_OK if all(r.certified for r in rows) else EXIT_UNCERTIFIED


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="housealloc", description="Preference elicitation for house allocation.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate an instance")
    g.add_argument("--family", choices=adv.FAMILIES, default="random")
    g.add_argument("--n", type=int)
    g.add_argument("--k", type=int)
    g.add_argument("--special", type=int, help="0-based special agent for thm9")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    r = sub.add_parser("run", help="run an elicitation algorithm")
    r.add_argument("--alg", choices=sorted(ALGORITHMS), required=True)
    r.add_argument("--instance")
    r.add_argument("--adversary", choices=("thm9", "thm8"))
    r.add_argument("--n", type=int)
    r.add_argument("--k", type=int, help="set size bound, or block count for the thm9 adversary")
    r.add_argument("--c0", type=parse_fraction)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--out")
    r.set_defaults(func=cmd_run)

    v = sub.add_parser("verify", help="certify a matching against partial knowledge")
    v.add_argument("--trace")
    v.add_argument("--instance")
    v.add_argument("--knowledge")
    v.add_argument("--matching")
    v.add_argument("--criterion", choices=("npo", "nrm"))
    v.add_argument("--method", choices=("poly", "bruteforce"), default="poly")
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)

    o = sub.add_parser("opt", help="offline-optimal query count")
    o.add_argument("--instance", required=True)
    o.add_argument("--model", choices=("next-best", "hybrid", "set-compare"), default="next-best")
    o.add_argument("--criterion", choices=("npo", "nrm"), default="nrm")
    o.add_argument("--bound", type=int, help="largest n to search")
    o.add_argument("--out")
    o.set_defaults(func=cmd_opt)

    b = sub.add_parser("bench", help="run a family x algorithm matrix")
    b.add_argument("--family", choices=adv.FAMILIES, default="random")
    b.add_argument("--alg", help="comma-separated algorithms (default: all)")
    b.add_argument("--k", dest="k_range", type=parse_range, help="thm9 block counts, e.g. 2..6")
    b.add_argument("--n", dest="n_range", type=parse_range, help="instance sizes, e.g. 3,4")
    b.add_argument("--count", type=int, default=5, help="random instances per size")
    b.add_argument("--set-size", type=int, default=2, help="k for po-setcompare-k")
    b.add_argument("--c0", type=parse_fraction)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--opt-bound", type=int, default=13, help="largest n for the next-best optimum")
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--out")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"housealloc: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EnumerationBoundError as exc:
        print(f"housealloc: refused: {exc}", file=sys.stderr)
        return EXIT_BOUND
    except (StructureError, ValueError, KeyError, OSError) as exc:
        print(f"housealloc: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
