"""Offline-optimal query counts for measuring competitive ratios.

An optimal algorithm that knows the profile only needs to reach a revealed
state admitting a necessarily optimal matching, so the search runs over
states rather than query sequences. Revealing more never hurts (the
completion set shrinks), which makes iterative deepening on the total
number of revealed facts exact.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, List, Optional, Sequence, Tuple, Union

from .core import Hybrid, Matching, NextBest, PartialKnowledge, PreferenceProfile
from .necessity import EnumerationBoundError, is_npo, nrm_exists_hybrid
from .optima import serial_dictatorship

MAX_NEXTBEST = 6
MAX_HYBRID = 4
CRITERIA = ("npo", "nrm")


@dataclass(frozen=True)
class OptResult:
    opt_count: int
    witness_state: PartialKnowledge
    witness_matching: Matching
    model: str
    criterion: str
    states_checked: int = 0


def pareto_candidates(profile: PreferenceProfile) -> List[Matching]:
    """All Pareto optimal matchings, as images of serial dictatorship."""
    seen = {}
    for sigma in itertools.permutations(range(profile.n)):
        m = serial_dictatorship(profile, sigma)
        seen.setdefault(m.pairs, m)
    return [seen[k] for k in sorted(seen)]


def _witness(pk: PartialKnowledge, criterion: str, candidates: Sequence[Matching]) -> Optional[Matching]:
    if criterion == "nrm":
        return nrm_exists_hybrid(pk)
    for m in candidates:
        if is_npo(pk, m):
            return m
    return None


def _vectors(total: int, lows: Sequence[int], highs: Sequence[int]) -> Iterator[Tuple[int, ...]]:
    """Integer vectors with ``lows <= v <= highs`` summing to ``total``, in lexicographic order."""
    if not lows:
        if total == 0:
            yield ()
        return
    rest_lo = sum(lows[1:])
    rest_hi = sum(highs[1:])
    for v in range(max(lows[0], total - rest_hi), min(highs[0], total - rest_lo) + 1):
        for tail in _vectors(total - v, lows[1:], highs[1:]):
            yield (v,) + tail


def _check_criterion(criterion: str) -> str:
    c = criterion.lower()
    if c not in CRITERIA:
        raise ValueError(f"criterion must be one of {CRITERIA}, got {criterion!r}")
    return c


def _branch_and_bound(options: Sequence[Sequence[Tuple[int, object]]],
                      feasible: Callable[[Tuple[object, ...]], Optional[Matching]]):
    """Cheapest per-agent choice with a witness, exploiting monotonicity.

    ``options[a]`` lists ``(cost, choice)`` by increasing cost and ends with
    the most informative choice. Revealing more never destroys a witness, so
    fixing a prefix of agents and giving every other agent its last option
    is an optimistic test that prunes soundly; the cheapest feasible cost of
    each agent alone gives admissible lower bounds.
    """
    n = len(options)
    full = tuple(opts[-1][1] for opts in options)
    checked = 0

    def test(choice: Tuple[object, ...]) -> Optional[Matching]:
        nonlocal checked
        checked += 1
        return feasible(choice)

    lows = []
    for a in range(n):
        low = options[a][-1][0]
        for cost, c in options[a]:
            if cost >= low:
                break
            if test(full[:a] + (c,) + full[a + 1:]) is not None:
                low = cost
                break
        lows.append(low)
    suffix = [0] * (n + 1)
    for a in range(n - 1, -1, -1):
        suffix[a] = suffix[a + 1] + lows[a]
    best_cost = sum(opts[-1][0] for opts in options)
    best = (full, test(full))

    def dfs(a: int, prefix: Tuple[object, ...], spent: int) -> None:
        nonlocal best_cost, best
        if a == n:
            return
        for cost, c in options[a]:
            if cost < lows[a]:
                continue
            if spent + cost + suffix[a + 1] >= best_cost:
                break
            head = prefix + (c,)
            m = test(head + full[a + 1:])
            if m is None:
                continue
            if a == n - 1:
                best_cost, best = spent + cost, (head, m)
                break
            dfs(a + 1, head, spent + cost)

    dfs(0, (), 0)
    return best_cost, best[0], best[1], checked


def opt_nextbest(profile: PreferenceProfile, criterion: str = "nrm", prune: bool = True,
                 max_agents: int = MAX_NEXTBEST) -> OptResult:
    """Fewest next-best queries after which some matching is necessarily optimal.

    ``prune=False`` runs plain iterative deepening over all prefix-length
    vectors; it is kept as an independent cross-check of the pruned search.
    """
    criterion = _check_criterion(criterion)
    n = profile.n
    if n > max_agents:
        raise EnumerationBoundError(f"n={n} exceeds the next-best search bound {max_agents}", n ** n)
    candidates = pareto_candidates(profile) if criterion == "npo" else []

    def feasible(ks):
        return _witness(NextBest.top_k(profile, ks), criterion, candidates)

    if prune:
        options = [[(k, k) for k in range(n)] for _ in range(n)]
        cost, ks, m, checked = _branch_and_bound(options, feasible)
        return OptResult(cost, NextBest.top_k(profile, ks), m, "next-best", criterion, checked)
    checked = 0
    for budget in range(0, n * (n - 1) + 1):
        for ks in _vectors(budget, (0,) * n, (n - 1,) * n):
            checked += 1
            m = feasible(ks)
            if m is not None:
                return OptResult(budget, NextBest.top_k(profile, ks), m, "next-best", criterion, checked)
    raise AssertionError("full knowledge always admits a necessarily optimal matching")


def _subsets_by_size(n: int) -> List[List[Tuple[int, ...]]]:
    return [list(itertools.combinations(range(1, n + 1), s)) for s in range(n)]


def opt_hybrid(profile: PreferenceProfile, criterion: str = "nrm", prune: bool = True,
               max_agents: int = MAX_HYBRID) -> OptResult:
    """Fewest hybrid queries (one revealed rank/house fact each) reaching a necessarily optimal state.

    Per agent at most ``n - 1`` facts are ever worth revealing since the
    last one is implied; which ``n - 1`` does not matter, so the fully
    informed option is ranks ``1..n-1``.
    """
    criterion = _check_criterion(criterion)
    n = profile.n
    if n > max_agents:
        raise EnumerationBoundError(f"n={n} exceeds the hybrid search bound {max_agents}", 2 ** (n * n))
    candidates = pareto_candidates(profile) if criterion == "npo" else []
    by_size = _subsets_by_size(n)

    def feasible(choice):
        return _witness(Hybrid.from_positions(profile, choice), criterion, candidates)

    if prune:
        opts = [(len(s), s) for group in by_size for s in group]
        last = tuple(range(1, n))
        opts = [o for o in opts if o[1] != last] + [(n - 1, last)]
        cost, choice, m, checked = _branch_and_bound([opts] * n, feasible)
        return OptResult(cost, Hybrid.from_positions(profile, choice), m, "hybrid", criterion, checked)
    checked = 0
    for budget in range(0, n * (n - 1) + 1):
        for sizes in _vectors(budget, (0,) * n, (n - 1,) * n):
            for choice in itertools.product(*(by_size[s] for s in sizes)):
                checked += 1
                m = feasible(choice)
                if m is not None:
                    return OptResult(budget, Hybrid.from_positions(profile, choice), m, "hybrid", criterion, checked)
    raise AssertionError("full knowledge always admits a necessarily optimal matching")


def opt_for(profile: PreferenceProfile, model: str, criterion: str) -> OptResult:
    if model == "next-best":
        return opt_nextbest(profile, criterion)
    if model == "hybrid":
        return opt_hybrid(profile, criterion)
    raise ValueError(f"no offline optimum is computed for the {model} model")


def competitive_ratio(trace_or_count, opt: Union[OptResult, int]) -> Optional[Fraction]:
    """Exact ratio of the algorithm's queries to the optimum.

    ``0 / 0`` counts as 1. A positive count against an optimum of 0 has no
    finite ratio and returns ``None``.
    """
    count = trace_or_count if isinstance(trace_or_count, int) else trace_or_count.query_count
    best = opt if isinstance(opt, int) else opt.opt_count
    if best == 0:
        return Fraction(1) if count == 0 else None
    return Fraction(count, best)


def format_ratio(r: Optional[Fraction]) -> str:
    if r is None:
        return "undefined"
    return f"{r.numerator}/{r.denominator} ({float(r):.6f})"
