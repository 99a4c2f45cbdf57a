"""Necessary optimality under partial knowledge.

Polynomial verifiers (envy digraphs, worst/best-case rank tables) live next to
brute-force oracles that range over every consistent completion. The oracles
refuse instances above a size bound instead of running forever.
"""

from __future__ import annotations

import itertools
import math
from graphlib import TopologicalSorter
from typing import Dict, Iterator, List, Optional, Tuple

from .core import (Hybrid, Matching, NextBest, PartialKnowledge, PreferenceProfile, SetCompare,
                   Signature, StructureError, as_hybrid, signature_of_ranks)
from .optima import has_cycle, irving_rounds, is_pareto_optimal, is_rank_maximal, rank_maximal_ranked

DEFAULT_MAX_AGENTS = 6
DEFAULT_MAX_COMPLETIONS = 10**7


class EnumerationBoundError(RuntimeError):
    def __init__(self, message: str, estimate: Optional[int] = None):
        super().__init__(message)
        self.estimate = estimate


# ---------------------------------------------------------------------------
# completions


def agent_orders(pk: PartialKnowledge, agent: int) -> List[Tuple[int, ...]]:
    """Every full ranking of ``agent`` consistent with ``pk``."""
    n = pk.n
    if isinstance(pk, NextBest):
        prefix = pk.prefixes[agent]
        rest = [h for h in range(n) if h not in prefix]
        return [prefix + tail for tail in itertools.permutations(rest)]
    if isinstance(pk, Hybrid):
        free_ranks = pk.unrevealed_ranks(agent)
        free_houses = [h for h in range(n) if pk.rank_of(agent, h) is None]
        out = []
        for perm in itertools.permutations(free_houses):
            row = [0] * n
            for r, h in pk.revealed[agent]:
                row[r - 1] = h
            for r, h in zip(free_ranks, perm):
                row[r - 1] = h
            out.append(tuple(row))
        return out
    if isinstance(pk, SetCompare):
        order = pk.order(agent)
        out = []
        for perm in itertools.permutations(range(n)):
            pos = [0] * n
            for i, h in enumerate(perm):
                pos[h] = i
            if all(pos[x] < pos[y] for x, y in order):
                out.append(perm)
        return out
    raise TypeError(f"unknown knowledge type {type(pk).__name__}")


def _check_size(pk: PartialKnowledge, max_agents: int) -> None:
    if pk.n > max_agents:
        raise EnumerationBoundError(
            f"n={pk.n} exceeds the enumeration bound of {max_agents} agents",
            estimate=math.factorial(pk.n) ** pk.n)


def completion_count(pk: PartialKnowledge, max_agents: int = DEFAULT_MAX_AGENTS) -> int:
    _check_size(pk, max_agents)
    return math.prod(len(agent_orders(pk, a)) for a in range(pk.n))


def enumerate_completions(pk: PartialKnowledge, max_agents: int = DEFAULT_MAX_AGENTS,
                          max_count: int = DEFAULT_MAX_COMPLETIONS) -> Iterator[PreferenceProfile]:
    """Stream every profile consistent with ``pk`` exactly once."""
    _check_size(pk, max_agents)
    per_agent = [agent_orders(pk, a) for a in range(pk.n)]
    estimate = math.prod(len(rows) for rows in per_agent)
    if estimate > max_count:
        raise EnumerationBoundError(f"{estimate} consistent completions exceed the bound {max_count}", estimate)
    for rows in itertools.product(*per_agent):
        yield PreferenceProfile(rows)


# ---------------------------------------------------------------------------
# necessarily Pareto optimal


def _require_perfect(pk: PartialKnowledge, m: Matching) -> Tuple[int, ...]:
    if not m.is_perfect(pk.n):
        raise StructureError("necessary Pareto optimality is only decided for perfect matchings")
    return m.assignment(pk.n)  # type: ignore[return-value]


def hybrid_arc(pk: Hybrid, agent: int, own: int, other: int) -> bool:
    """Can ``agent`` rank ``other`` above its own house ``own`` in some completion?"""
    r_own = pk.rank_of(agent, own)
    r_other = pk.rank_of(agent, other)
    if r_own is not None and r_other is not None:
        return r_other < r_own
    if r_own is not None:
        # other is unrevealed: needs a free rank above own
        k = pk.k(agent)
        return k is not None and k < r_own
    if r_other is not None:
        # own is unrevealed: needs a free rank below other
        ell = pk.ell(agent)
        return ell is not None and ell > r_other
    return True


def envy_digraph_hybrid(pk: PartialKnowledge, m: Matching) -> Dict[int, List[int]]:
    h = as_hybrid(pk)
    mine = _require_perfect(h, m)
    return {a: [b for b in range(h.n) if b != a and hybrid_arc(h, a, mine[a], mine[b])] for a in range(h.n)}


def envy_digraph_setcompare(pk: SetCompare, m: Matching) -> Dict[int, List[int]]:
    mine = _require_perfect(pk, m)
    return {a: [b for b in range(pk.n) if b != a and not pk.forces(a, mine[a], mine[b])] for a in range(pk.n)}


def envy_digraph(pk: PartialKnowledge, m: Matching) -> Dict[int, List[int]]:
    if isinstance(pk, SetCompare):
        return envy_digraph_setcompare(pk, m)
    return envy_digraph_hybrid(pk, m)


def is_npo_hybrid(pk: PartialKnowledge, m: Matching) -> bool:
    return not has_cycle(envy_digraph_hybrid(pk, m))


def is_npo_setcompare(pk: SetCompare, m: Matching) -> bool:
    return not has_cycle(envy_digraph_setcompare(pk, m))


def is_npo(pk: PartialKnowledge, m: Matching) -> bool:
    return not has_cycle(envy_digraph(pk, m))


def sd_certificate(pk: PartialKnowledge, m: Matching) -> Optional[Tuple[int, ...]]:
    """A dictator order reproducing ``m`` under every completion, or ``None``.

    Agents that ``a`` might envy are placed before ``a``.
    """
    arcs = envy_digraph(pk, m)
    if has_cycle(arcs):
        return None
    ts = TopologicalSorter()
    for a in range(pk.n):
        ts.add(a, *arcs[a])
    return tuple(ts.static_order())


def min_queries_lower_bound_po(pk: PartialKnowledge, m: Matching) -> int:
    """Sum over dictator positions of the revealed-list length any NPO state needs."""
    sigma = sd_certificate(pk, m)
    if sigma is None:
        raise StructureError("matching is not necessarily Pareto optimal")
    h = as_hybrid(pk)
    n = h.n
    total = 0
    for i, a in enumerate(sigma, start=1):
        r = h.rank_of(a, m.house_of(a))
        total += min(r, n - i) if r is not None else n - i
    return total


# ---------------------------------------------------------------------------
# necessarily rank-maximal (hybrid and next-best)


def maxrank_table(pk: PartialKnowledge) -> Dict[Tuple[int, int], int]:
    """Worst possible rank of every house: revealed rank, else the last free rank."""
    h = as_hybrid(pk)
    table = {}
    for a in range(h.n):
        ell = h.ell(a)
        for x in range(h.n):
            r = h.rank_of(a, x)
            table[(a, x)] = r if r is not None else ell
    return table


def optimistic_table(pk: PartialKnowledge, m: Matching) -> Dict[Tuple[int, int], int]:
    """Ranks that are simultaneously worst for ``m`` and best for everyone else.

    ``m``'s unrevealed houses sink to the last free rank; any other unrevealed
    house rises to the first free rank.
    """
    h = as_hybrid(pk)
    table = {}
    for a in range(h.n):
        own = m.house_of(a)
        k, ell = h.k(a), h.ell(a)
        for x in range(h.n):
            r = h.rank_of(a, x)
            if r is None:
                r = ell if x == own else k
            table[(a, x)] = r
    return table


def is_nrm_hybrid(pk: PartialKnowledge, m: Matching) -> bool:
    """``m`` is rank-maximal in every completion of hybrid/next-best knowledge."""
    h = as_hybrid(pk)
    n = h.n
    m.check(n)
    if not m.is_perfect(n):
        return False
    table = optimistic_table(h, m)
    own_sig = signature_of_ranks((table[p] for p in m.pairs), n)
    _, best = rank_maximal_ranked(n, n, table, n)
    return best == own_sig


def deduce_forced(pk: PartialKnowledge) -> Hybrid:
    """Fill in the house of a lone unrevealed rank; it is determined."""
    h = as_hybrid(pk)
    rows = []
    for a in range(h.n):
        row = h.revealed[a]
        free = h.unrevealed_ranks(a)
        if len(free) == 1:
            missing = next(x for x in range(h.n) if h.rank_of(a, x) is None)
            row = row + ((free[0], missing),)
        rows.append(row)
    return Hybrid(h.n, tuple(rows))


def nrm_exists_hybrid(pk: PartialKnowledge) -> Optional[Matching]:
    """Find a necessarily rank-maximal matching, or ``None`` if there is none.

    An agent with a single unrevealed rank is first completed, since the
    pairing rule below relies on ``k_a < l_a`` for every undecided agent.
    """
    h = deduce_forced(pk)
    n = h.n
    worst = maxrank_table(h)
    history = irving_rounds(n, n, worst, n)

    def even_before(a: int, x: int, ell: int) -> bool:
        # the rank-ell edge (a, x) only enters the layered graph if neither
        # end was ever odd or unreachable in an earlier round
        return all(rd.dm.agents[a] == "E" and rd.dm.houses[x] == "E" for rd in history[: ell - 1])

    forced: Dict[int, int] = {}
    claimed: Dict[int, int] = {}
    for a in range(n):
        ell = h.ell(a)
        if ell is None:
            continue
        for x in range(n):
            if h.rank_of(a, x) is None and even_before(a, x, ell):
                if a in forced or x in claimed:
                    return None
                forced[a] = x
                claimed[x] = a
    residual = {(a, x): r for a in range(n) if a not in forced
                for r, x in h.revealed[a] if x not in claimed}
    rest, _ = rank_maximal_ranked(n, n, residual, n)
    candidate = Matching.from_pairs(list(forced.items()) + list(rest.pairs))
    if len(candidate) < n or not is_nrm_hybrid(h, candidate):
        return None
    return candidate


# ---------------------------------------------------------------------------
# brute-force oracles


def _perfect_matchings(n: int) -> Iterator[Tuple[int, ...]]:
    return itertools.permutations(range(n))


def npo_bruteforce(pk: PartialKnowledge, m: Matching, method: str = "factored",
                   max_agents: int = DEFAULT_MAX_AGENTS) -> bool:
    """``m`` is Pareto optimal in every completion of ``pk``.

    ``method="enumerate"`` literally checks every completion. ``"factored"``
    gives the same answer by looping over all matchings ``m'`` and asking,
    agent by agent, whether some consistent ranking prefers ``m'(a)`` to
    ``m(a)``; completions are independent across agents, so ``m'`` dominates
    ``m`` in some completion iff every moved agent can prefer its new house.
    """
    mine = _require_perfect(pk, m)
    _check_size(pk, max_agents)
    if method == "enumerate":
        return all(is_pareto_optimal(p, m) for p in enumerate_completions(pk, max_agents))
    if method != "factored":
        raise ValueError(f"unknown method {method!r}")
    n = pk.n
    can_prefer = []
    for a in range(n):
        ok = [False] * n
        for row in agent_orders(pk, a):
            for h in row:
                if h == mine[a]:
                    break
                ok[h] = True
        can_prefer.append(ok)
    for other in _perfect_matchings(n):
        if other == mine:
            continue
        if all(other[a] == mine[a] or can_prefer[a][other[a]] for a in range(n)):
            return False
    return True


def nrm_bruteforce(pk: PartialKnowledge, m: Matching, method: str = "factored",
                   max_agents: int = DEFAULT_MAX_AGENTS) -> bool:
    """``m`` is rank-maximal in every completion of ``pk``.

    The factored method uses that the lexicographic order on integer vectors
    is compatible with addition, so the best adversarial completion for a
    fixed rival ``m'`` is chosen agent by agent.
    """
    n = pk.n
    m.check(n)
    _check_size(pk, max_agents)
    if not m.is_perfect(n):
        return False
    if method == "enumerate":
        return all(is_rank_maximal(p, m) for p in enumerate_completions(pk, max_agents))
    if method != "factored":
        raise ValueError(f"unknown method {method!r}")
    mine = m.assignment(n)
    zero = (0,) * n
    # best[a][y]: lexicographically largest e_rank(y) - e_rank(own) over a's rankings
    best: List[List[Tuple[int, ...]]] = []
    for a in range(n):
        row_best = [zero] * n
        seen = [False] * n
        for row in agent_orders(pk, a):
            pos = {h: i for i, h in enumerate(row)}
            ro = pos[mine[a]]
            for y in range(n):
                if y == mine[a]:
                    continue
                vec = [0] * n
                vec[pos[y]] += 1
                vec[ro] -= 1
                vec = tuple(vec)
                if not seen[y] or vec > row_best[y]:
                    row_best[y] = vec
                    seen[y] = True
        best.append(row_best)
    for other in _perfect_matchings(n):
        total = [0] * n
        for a in range(n):
            for i, v in enumerate(best[a][other[a]]):
                total[i] += v
        if tuple(total) > zero:
            return False
    return True


def npo_exists_bruteforce(pk: PartialKnowledge, **kw) -> Optional[Matching]:
    for perm in _perfect_matchings(pk.n):
        m = Matching.from_assignment(perm)
        if npo_bruteforce(pk, m, **kw):
            return m
    return None


def nrm_matchings_bruteforce(pk: PartialKnowledge, **kw) -> List[Matching]:
    out = []
    for perm in _perfect_matchings(pk.n):
        m = Matching.from_assignment(perm)
        if nrm_bruteforce(pk, m, **kw):
            out.append(m)
    return out


def is_necessarily_optimal(pk: PartialKnowledge, m: Matching, criterion: str) -> bool:
    """Polynomial verifier for the given criterion ('npo' or 'nrm')."""
    if criterion == "npo":
        return is_npo(pk, m)
    if criterion == "nrm":
        if isinstance(pk, SetCompare):
            return nrm_bruteforce(pk, m)
        return is_nrm_hybrid(pk, m)
    raise ValueError(f"unknown criterion {criterion!r}")


def worst_signature(pk: PartialKnowledge, m: Matching) -> Signature:
    table = maxrank_table(pk)
    return signature_of_ranks((table[p] for p in m.pairs), pk.n)
