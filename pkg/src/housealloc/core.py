"""Domain types for house allocation under partial preferences.

Agents and houses are integers in ``range(n)``. Ranks are 1-based at every
public boundary (``rank(a, h) == 1`` is the favourite house); internal tables
are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

Signature = Tuple[int, ...]
Pair = Tuple[int, int]


class StructureError(ValueError):
    """Raised when ids, matchings or knowledge do not fit an instance."""


@dataclass(frozen=True)
class PreferenceProfile:
    """Complete strict rankings; ``prefs[a][p]`` is the house of rank ``p + 1``."""

    prefs: Tuple[Tuple[int, ...], ...]

    def __post_init__(self) -> None:
        prefs = tuple(tuple(int(h) for h in row) for row in self.prefs)
        object.__setattr__(self, "prefs", prefs)
        n = len(prefs)
        if n < 1:
            raise StructureError("a profile needs at least one agent")
        everything = set(range(n))
        for a, row in enumerate(prefs):
            if len(row) != n or set(row) != everything:
                raise StructureError(f"agent {a} does not rank every house exactly once")

    @property
    def n(self) -> int:
        return len(self.prefs)

    @cached_property
    def rank_table(self) -> Tuple[Tuple[int, ...], ...]:
        """0-based ranks: ``rank_table[a][h]``."""
        table = []
        for row in self.prefs:
            r = [0] * len(row)
            for pos, h in enumerate(row):
                r[h] = pos
            table.append(tuple(r))
        return tuple(table)

    def rank(self, agent: int, house: int) -> int:
        return self.rank_table[agent][house] + 1

    def house_at(self, agent: int, rank: int) -> int:
        return self.prefs[agent][rank - 1]

    def prefers(self, agent: int, x: int, y: int) -> bool:
        """True iff ``agent`` strictly prefers house ``x`` to house ``y``."""
        r = self.rank_table[agent]
        return r[x] < r[y]

    def best_of(self, agent: int, houses: Iterable[int]) -> int:
        r = self.rank_table[agent]
        return min(houses, key=r.__getitem__)

    @classmethod
    def from_lists(cls, prefs: Sequence[Sequence[int]]) -> "PreferenceProfile":
        return cls(tuple(tuple(row) for row in prefs))


@dataclass(frozen=True)
class Matching:
    """A partial injection agents -> houses, stored as sorted pairs."""

    pairs: Tuple[Pair, ...]

    def __post_init__(self) -> None:
        pairs = tuple(sorted((int(a), int(h)) for a, h in self.pairs))
        agents = [a for a, _ in pairs]
        houses = [h for _, h in pairs]
        if len(set(agents)) != len(agents) or len(set(houses)) != len(houses):
            raise StructureError(f"not a matching: {pairs}")
        if any(a < 0 or h < 0 for a, h in pairs):
            raise StructureError("negative ids")
        object.__setattr__(self, "pairs", pairs)

    @classmethod
    def from_pairs(cls, pairs: Iterable[Pair]) -> "Matching":
        return cls(tuple(pairs))

    @classmethod
    def from_assignment(cls, houses: Sequence[Optional[int]]) -> "Matching":
        """Build from a per-agent list of houses (``None`` = unmatched)."""
        return cls(tuple((a, h) for a, h in enumerate(houses) if h is not None))

    @cached_property
    def agent_map(self) -> Dict[int, int]:
        return dict(self.pairs)

    @cached_property
    def house_map(self) -> Dict[int, int]:
        return {h: a for a, h in self.pairs}

    def house_of(self, agent: int) -> Optional[int]:
        return self.agent_map.get(agent)

    def agent_of(self, house: int) -> Optional[int]:
        return self.house_map.get(house)

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[Pair]:
        return iter(self.pairs)

    def is_perfect(self, n: int) -> bool:
        return len(self.pairs) == n and all(a < n and h < n for a, h in self.pairs)

    def assignment(self, n: int) -> Tuple[Optional[int], ...]:
        return tuple(self.agent_map.get(a) for a in range(n))

    def check(self, n: int) -> None:
        for a, h in self.pairs:
            if a >= n or h >= n:
                raise StructureError(f"pair ({a}, {h}) outside an instance of size {n}")


def signature_of_ranks(ranks: Iterable[int], length: int) -> Signature:
    """Count 1-based ranks into a vector of ``length`` entries."""
    counts = [0] * length
    for r in ranks:
        counts[r - 1] += 1
    return tuple(counts)


def signature(profile: PreferenceProfile, m: Matching) -> Signature:
    m.check(profile.n)
    table = profile.rank_table
    counts = [0] * profile.n
    for a, h in m.pairs:
        counts[table[a][h]] += 1
    return tuple(counts)


def rank_dominates(s1: Sequence[int], s2: Sequence[int]) -> bool:
    """Strict lexicographic comparison of two signatures of equal length."""
    if len(s1) != len(s2):
        raise StructureError(f"signature lengths differ: {len(s1)} vs {len(s2)}")
    return tuple(s1) > tuple(s2)


# ---------------------------------------------------------------------------
# partial knowledge


@dataclass(frozen=True)
class NextBest:
    """Top-k prefixes revealed by next-best queries."""

    n: int
    prefixes: Tuple[Tuple[int, ...], ...]
    model = "next-best"

    def __post_init__(self) -> None:
        prefixes = tuple(tuple(int(h) for h in p) for p in self.prefixes)
        object.__setattr__(self, "prefixes", prefixes)
        if len(prefixes) != self.n:
            raise StructureError("one prefix per agent required")
        for a, p in enumerate(prefixes):
            if len(set(p)) != len(p) or any(not 0 <= h < self.n for h in p):
                raise StructureError(f"bad prefix for agent {a}: {p}")

    @classmethod
    def empty(cls, n: int) -> "NextBest":
        return cls(n, tuple(() for _ in range(n)))

    @classmethod
    def top_k(cls, profile: PreferenceProfile, ks: Sequence[int]) -> "NextBest":
        return cls(profile.n, tuple(profile.prefs[a][:k] for a, k in enumerate(ks)))

    def rev(self, agent: int) -> FrozenSet[int]:
        return frozenset(self.prefixes[agent])

    def to_hybrid(self) -> "Hybrid":
        return Hybrid(self.n, tuple(tuple((r + 1, h) for r, h in enumerate(p)) for p in self.prefixes))


@dataclass(frozen=True)
class Hybrid:
    """Revealed (rank, house) facts per agent."""

    n: int
    revealed: Tuple[Tuple[Pair, ...], ...]
    model = "hybrid"

    def __post_init__(self) -> None:
        rows = tuple(tuple(sorted((int(r), int(h)) for r, h in row)) for row in self.revealed)
        object.__setattr__(self, "revealed", rows)
        if len(rows) != self.n:
            raise StructureError("one revealed map per agent required")
        for a, row in enumerate(rows):
            ranks = [r for r, _ in row]
            houses = [h for _, h in row]
            if len(set(ranks)) != len(ranks) or len(set(houses)) != len(houses):
                raise StructureError(f"revealed map of agent {a} is not injective: {row}")
            if any(not 1 <= r <= self.n or not 0 <= h < self.n for r, h in row):
                raise StructureError(f"revealed map of agent {a} out of range: {row}")

    @classmethod
    def empty(cls, n: int) -> "Hybrid":
        return cls(n, tuple(() for _ in range(n)))

    @classmethod
    def from_positions(cls, profile: PreferenceProfile, positions: Sequence[Iterable[int]]) -> "Hybrid":
        """Reveal the given 1-based ranks of each agent from ``profile``."""
        return cls(profile.n, tuple(tuple((r, profile.house_at(a, r)) for r in sorted(ps))
                                    for a, ps in enumerate(positions)))

    @cached_property
    def _house_rank(self) -> Tuple[Dict[int, int], ...]:
        return tuple({h: r for r, h in row} for row in self.revealed)

    @cached_property
    def _rank_house(self) -> Tuple[Dict[int, int], ...]:
        return tuple({r: h for r, h in row} for row in self.revealed)

    def rank_of(self, agent: int, house: int) -> Optional[int]:
        return self._house_rank[agent].get(house)

    def house_at(self, agent: int, rank: int) -> Optional[int]:
        return self._rank_house[agent].get(rank)

    def rev(self, agent: int) -> FrozenSet[int]:
        return frozenset(self._house_rank[agent])

    def unrevealed_ranks(self, agent: int) -> List[int]:
        known = self._rank_house[agent]
        return [r for r in range(1, self.n + 1) if r not in known]

    def k(self, agent: int) -> Optional[int]:
        """First rank with no revealed house (``None`` if all are revealed)."""
        free = self.unrevealed_ranks(agent)
        return free[0] if free else None

    def ell(self, agent: int) -> Optional[int]:
        """Last rank with no revealed house (``None`` if all are revealed)."""
        free = self.unrevealed_ranks(agent)
        return free[-1] if free else None

    def reveal(self, agent: int, rank: int, house: int) -> "Hybrid":
        rows = list(self.revealed)
        rows[agent] = rows[agent] + ((rank, house),)
        return Hybrid(self.n, tuple(rows))


@dataclass(frozen=True)
class SetCompare:
    """Raw answers ``(query set, winner)`` per agent; the order is derived."""

    n: int
    answers: Tuple[Tuple[Tuple[FrozenSet[int], int], ...], ...]
    model = "set-compare"

    def __post_init__(self) -> None:
        rows = tuple(tuple((frozenset(int(h) for h in s), int(w)) for s, w in row) for row in self.answers)
        object.__setattr__(self, "answers", rows)
        if len(rows) != self.n:
            raise StructureError("one answer list per agent required")
        for a, row in enumerate(rows):
            for s, w in row:
                if w not in s or any(not 0 <= h < self.n for h in s):
                    raise StructureError(f"agent {a}: winner {w} not in query set {sorted(s)}")
        for a in range(self.n):
            closure = self.order(a)
            if any((y, x) in closure for x, y in closure):
                raise StructureError(f"answers of agent {a} are cyclic")

    @classmethod
    def empty(cls, n: int) -> "SetCompare":
        return cls(n, tuple(() for _ in range(n)))

    @cached_property
    def _closures(self) -> Tuple[FrozenSet[Pair], ...]:
        out = []
        for row in self.answers:
            better: Dict[int, set] = {h: set() for h in range(self.n)}
            for s, w in row:
                better[w].update(h for h in s if h != w)
            # transitive closure; n is small
            changed = True
            while changed:
                changed = False
                for x in range(self.n):
                    extra = set()
                    for y in better[x]:
                        extra |= better[y]
                    if not extra <= better[x]:
                        better[x] |= extra
                        changed = True
            out.append(frozenset((x, y) for x in better for y in better[x]))
        return tuple(out)

    def order(self, agent: int) -> FrozenSet[Pair]:
        """Pairs ``(x, y)`` with ``x`` forced above ``y`` for ``agent``."""
        return self._closures[agent]

    def forces(self, agent: int, x: int, y: int) -> bool:
        return (x, y) in self._closures[agent]

    def rev(self, agent: int) -> FrozenSet[int]:
        return frozenset(h for s, _ in self.answers[agent] for h in s)

    def record(self, agent: int, houses: Iterable[int], winner: int) -> "SetCompare":
        rows = list(self.answers)
        rows[agent] = rows[agent] + ((frozenset(houses), winner),)
        return SetCompare(self.n, tuple(rows))


PartialKnowledge = Union[NextBest, Hybrid, SetCompare]


def is_consistent(pk: PartialKnowledge, profile: PreferenceProfile) -> bool:
    if pk.n != profile.n:
        return False
    if isinstance(pk, NextBest):
        return all(profile.prefs[a][: len(p)] == p for a, p in enumerate(pk.prefixes))
    if isinstance(pk, Hybrid):
        return all(profile.house_at(a, r) == h for a, row in enumerate(pk.revealed) for r, h in row)
    if isinstance(pk, SetCompare):
        return all(profile.best_of(a, s) == w for a, row in enumerate(pk.answers) for s, w in row)
    raise TypeError(f"unknown knowledge type {type(pk).__name__}")


def as_hybrid(pk: PartialKnowledge) -> Hybrid:
    if isinstance(pk, Hybrid):
        return pk
    if isinstance(pk, NextBest):
        return pk.to_hybrid()
    raise TypeError(f"{pk.model} knowledge has no hybrid form")


def full_knowledge(profile: PreferenceProfile, model: str = "hybrid") -> PartialKnowledge:
    """Knowledge that pins down ``profile`` completely."""
    n = profile.n
    if model == "next-best":
        return NextBest(n, profile.prefs)
    if model == "hybrid":
        return Hybrid.from_positions(profile, [range(1, n + 1)] * n)
    if model == "set-compare":
        rows = []
        for row in profile.prefs:
            rows.append(tuple((frozenset(row[i:]), row[i]) for i in range(n - 1)))
        return SetCompare(n, tuple(rows))
    raise ValueError(f"unknown model {model!r}")


def identity(n: int) -> Tuple[int, ...]:
    return tuple(range(n))


def check_permutation(sigma: Sequence[int], n: int) -> Tuple[int, ...]:
    sigma = tuple(int(a) for a in sigma)
    if sorted(sigma) != list(range(n)):
        raise StructureError(f"{sigma} is not a permutation of {n} agents")
    return sigma
