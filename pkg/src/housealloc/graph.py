"""Bipartite maximum matching and the Dulmage-Mendelsohn (E, O, U) partition.

Vertices are tagged tuples: ``("a", i)`` for agents (left side) and
``("h", j)`` for houses (right side).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import FrozenSet, Iterable, List, Optional, Tuple

from .core import Matching, StructureError

Vertex = Tuple[str, int]
EVEN, ODD, UNREACHABLE = "E", "O", "U"


def agent(i: int) -> Vertex:
    return ("a", i)


def house(j: int) -> Vertex:
    return ("h", j)


@dataclass(frozen=True)
class BipartiteGraph:
    left: int
    right: int
    edges: FrozenSet[Tuple[int, int]]

    def __post_init__(self) -> None:
        edges = frozenset((int(a), int(h)) for a, h in self.edges)
        object.__setattr__(self, "edges", edges)
        for a, h in edges:
            if not (0 <= a < self.left and 0 <= h < self.right):
                raise StructureError(f"edge ({a}, {h}) out of range")

    @classmethod
    def from_edges(cls, left: int, right: int, edges: Iterable[Tuple[int, int]]) -> "BipartiteGraph":
        return cls(left, right, frozenset(edges))

    @cached_property
    def adj(self) -> Tuple[Tuple[int, ...], ...]:
        out: List[List[int]] = [[] for _ in range(self.left)]
        for a, h in self.edges:
            out[a].append(h)
        return tuple(tuple(sorted(row)) for row in out)

    @cached_property
    def radj(self) -> Tuple[Tuple[int, ...], ...]:
        out: List[List[int]] = [[] for _ in range(self.right)]
        for a, h in self.edges:
            out[h].append(a)
        return tuple(tuple(sorted(col)) for col in out)

    def vertices(self) -> List[Vertex]:
        return [agent(i) for i in range(self.left)] + [house(j) for j in range(self.right)]


def max_matching(g: BipartiteGraph, seed: Optional[Matching] = None) -> Matching:
    """Augment ``seed`` to a maximum matching of ``g``.

    Free agents are tried in ascending order and neighbours are explored in
    ascending order, so the result is a deterministic function of the input.
    """
    mate_l: List[Optional[int]] = [None] * g.left
    mate_r: List[Optional[int]] = [None] * g.right
    if seed is not None:
        for a, h in seed.pairs:
            if (a, h) not in g.edges:
                raise StructureError(f"seed edge ({a}, {h}) is not in the graph")
            mate_l[a] = h
            mate_r[h] = a
    adj = g.adj

    def augment(a: int, seen: List[bool]) -> bool:
        # a free neighbour beats rerouting, which keeps the result in index order
        for h in adj[a]:
            if mate_r[h] is None:
                mate_l[a] = h
                mate_r[h] = a
                return True
        for h in adj[a]:
            if seen[h]:
                continue
            seen[h] = True
            if mate_r[h] is None or augment(mate_r[h], seen):
                mate_l[a] = h
                mate_r[h] = a
                return True
        return False

    for a in range(g.left):
        if mate_l[a] is None and adj[a]:
            augment(a, [False] * g.right)
    return Matching.from_assignment(mate_l)


@dataclass(frozen=True)
class DmDecomposition:
    agents: Tuple[str, ...]
    houses: Tuple[str, ...]

    def label(self, v: Vertex) -> str:
        side, i = v
        return self.agents[i] if side == "a" else self.houses[i]

    def _collect(self, tag: str) -> FrozenSet[Vertex]:
        return frozenset([agent(i) for i, t in enumerate(self.agents) if t == tag]
                         + [house(j) for j, t in enumerate(self.houses) if t == tag])

    @property
    def even(self) -> FrozenSet[Vertex]:
        return self._collect(EVEN)

    @property
    def odd(self) -> FrozenSet[Vertex]:
        return self._collect(ODD)

    @property
    def unreachable(self) -> FrozenSet[Vertex]:
        return self._collect(UNREACHABLE)


def dm_decompose(g: BipartiteGraph, m: Matching) -> DmDecomposition:
    """Alternating BFS from every unmatched vertex on both sides.

    Raises ``StructureError`` if ``m`` is not a maximum matching (an odd
    vertex turns out to be unmatched, i.e. an augmenting path exists).
    """
    for a, h in m.pairs:
        if (a, h) not in g.edges:
            raise StructureError(f"matching edge ({a}, {h}) is not in the graph")
    mate_l = [m.house_of(a) for a in range(g.left)]
    mate_r = [m.agent_of(h) for h in range(g.right)]
    lab_l: List[Optional[str]] = [None] * g.left
    lab_r: List[Optional[str]] = [None] * g.right
    queue: deque = deque()
    for a in range(g.left):
        if mate_l[a] is None:
            lab_l[a] = EVEN
            queue.append(("a", a))
    for h in range(g.right):
        if mate_r[h] is None:
            lab_r[h] = EVEN
            queue.append(("h", h))

    def mark(labels: List[Optional[str]], i: int, tag: str) -> bool:
        if labels[i] is None:
            labels[i] = tag
            return True
        if labels[i] != tag:
            raise StructureError("matching is not maximum (vertex is both even and odd)")
        return False

    while queue:
        side, i = queue.popleft()
        if side == "a":
            # even agent: leave along non-matching edges to odd houses
            for h in g.adj[i]:
                if h == mate_l[i]:
                    continue
                if mark(lab_r, h, ODD):
                    if mate_r[h] is None:
                        raise StructureError("matching is not maximum (augmenting path found)")
                    if mark(lab_l, mate_r[h], EVEN):
                        queue.append(("a", mate_r[h]))
        else:
            for a in g.radj[i]:
                if a == mate_r[i]:
                    continue
                if mark(lab_l, a, ODD):
                    if mate_l[a] is None:
                        raise StructureError("matching is not maximum (augmenting path found)")
                    if mark(lab_r, mate_l[a], EVEN):
                        queue.append(("h", mate_l[a]))
    return DmDecomposition(tuple(t or UNREACHABLE for t in lab_l), tuple(t or UNREACHABLE for t in lab_r))
