"""Offline optimality with complete preferences."""

from __future__ import annotations

from dataclasses import dataclass
from graphlib import CycleError, TopologicalSorter
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple

from .core import (Matching, PreferenceProfile, Signature, StructureError, check_permutation,
                   signature, signature_of_ranks)
from .graph import ODD, UNREACHABLE, BipartiteGraph, DmDecomposition, dm_decompose, max_matching

RankedEdges = Mapping[Tuple[int, int], int]


def serial_dictatorship(profile: PreferenceProfile, sigma: Sequence[int]) -> Matching:
    sigma = check_permutation(sigma, profile.n)
    taken = set()
    pairs = []
    for a in sigma:
        h = next(h for h in profile.prefs[a] if h not in taken)
        taken.add(h)
        pairs.append((a, h))
    return Matching.from_pairs(pairs)


def has_cycle(arcs: Mapping[int, Sequence[int]]) -> bool:
    try:
        TopologicalSorter(arcs).prepare()
    except CycleError:
        return True
    return False


def envy_arcs(profile: PreferenceProfile, m: Matching) -> Dict[int, List[int]]:
    """Arc a -> b iff a strictly prefers b's house to its own."""
    table = profile.rank_table
    mine = m.assignment(profile.n)
    return {a: [b for b in range(profile.n) if b != a and table[a][mine[b]] < table[a][mine[a]]]
            for a in range(profile.n)}


def is_pareto_optimal(profile: PreferenceProfile, m: Matching) -> bool:
    """Envy-cycle test; only defined for perfect matchings."""
    if not m.is_perfect(profile.n):
        raise StructureError("Pareto optimality is only decided for perfect matchings")
    return not has_cycle(envy_arcs(profile, m))


@dataclass(frozen=True)
class RmRound:
    """State of the iterative rank-maximal algorithm after round ``i``."""

    i: int
    edges: FrozenSet[Tuple[int, int]]
    matching: Matching
    dm: DmDecomposition
    deleted: FrozenSet[Tuple[int, int]]


def irving_rounds(left: int, right: int, ranked: RankedEdges, rounds: Optional[int] = None) -> List[RmRound]:
    """Run the iterative rank-maximal algorithm on arbitrary ranked edges.

    Ties (several edges of equal rank at an agent) and missing edges are
    allowed. Round ``i`` adds the surviving rank-``i`` edges, augments the
    previous matching, decomposes, then deletes O-O and O-U edges; vertices
    that reached O or U never receive edges of a later rank.
    """
    top = max(ranked.values(), default=0)
    rounds = top if rounds is None else rounds
    by_rank: Dict[int, List[Tuple[int, int]]] = {}
    for e, r in ranked.items():
        by_rank.setdefault(r, []).append(e)
    edges: set = set()
    deleted: set = set()
    closed_a: set = set()
    closed_h: set = set()
    m = Matching(())
    history = []
    for i in range(1, rounds + 1):
        for a, h in by_rank.get(i, ()):
            if a in closed_a or h in closed_h:
                deleted.add((a, h))
            else:
                edges.add((a, h))
        g = BipartiteGraph(left, right, frozenset(edges))
        m = max_matching(g, m)
        dm = dm_decompose(g, m)
        for a, t in enumerate(dm.agents):
            if t != "E":
                closed_a.add(a)
        for h, t in enumerate(dm.houses):
            if t != "E":
                closed_h.add(h)
        for a, h in list(edges):
            ta, th = dm.agents[a], dm.houses[h]
            if (ta == ODD and th in (ODD, UNREACHABLE)) or (th == ODD and ta == UNREACHABLE):
                edges.discard((a, h))
                deleted.add((a, h))
        history.append(RmRound(i, frozenset(edges), m, dm, frozenset(deleted)))
    return history


def profile_edges(profile: PreferenceProfile) -> Dict[Tuple[int, int], int]:
    return {(a, h): r + 1 for a, row in enumerate(profile.rank_table) for h, r in enumerate(row)}


def rank_maximal_ranked(left: int, right: int, ranked: RankedEdges, length: Optional[int] = None
                        ) -> Tuple[Matching, Signature]:
    """Rank-maximal matching of a ranked edge set; signature has ``length`` entries."""
    length = max(ranked.values(), default=0) if length is None else length
    history = irving_rounds(left, right, ranked, length)
    m = history[-1].matching if history else Matching(())
    return m, signature_of_ranks((ranked[p] for p in m.pairs), length)


def rank_maximal(profile: PreferenceProfile) -> Tuple[Matching, Signature]:
    n = profile.n
    m, _ = rank_maximal_ranked(n, n, profile_edges(profile), n)
    return m, signature(profile, m)


def is_rank_maximal(profile: PreferenceProfile, m: Matching) -> bool:
    return signature(profile, m) == rank_maximal(profile)[1]


def r_values(profile: PreferenceProfile) -> Tuple[int, ...]:
    """``r_a``: first round in which agent ``a`` leaves the even set."""
    history = irving_rounds(profile.n, profile.n, profile_edges(profile), profile.n)
    out = []
    for a in range(profile.n):
        out.append(next(rd.i for rd in history if rd.dm.agents[a] != "E"))
    return tuple(out)
