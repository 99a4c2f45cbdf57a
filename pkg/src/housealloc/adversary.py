"""Lower-bound instance families, adaptive adversaries and random instances."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Callable, Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

from .core import PreferenceProfile, StructureError
from .elicit import Oracle, QueryError
from .graph import BipartiteGraph, max_matching


def random_profile(n: int, seed: Optional[int] = None) -> PreferenceProfile:
    """Independent uniform rankings from ``random.Random(seed)``."""
    if n < 1:
        raise StructureError("n must be positive")
    rng = random.Random(seed)
    return PreferenceProfile(tuple(tuple(rng.sample(range(n), n)) for _ in range(n)))


# ---------------------------------------------------------------------------
# odd cycle of blocks with one special agent


def _fill(n: int, head: Sequence[int], tail: Sequence[int]) -> Tuple[int, ...]:
    used = set(head) | set(tail)
    return tuple(head) + tuple(h for h in range(n) if h not in used) + tuple(tail)


def thm9_profile(k: int, special: Optional[int] = None,
                 second: Optional[Sequence[int]] = None) -> PreferenceProfile:
    """Blocks of two agents sharing a first choice; the special agent ranks the last house third.

    With 1-based names and ``n = 2k + 1``: agent ``a_{2i-1}`` ranks
    ``h_{2i-1}`` then ``h_{2(i-1)}`` (``h_0`` read as ``h_{2k}``), agent
    ``a_{2i}`` ranks ``h_{2i-1}`` then ``h_{2i}``, and ``a_{2k+1}`` copies
    ``a_{2k}``. Everyone except ``special`` ranks ``h_{2k+1}`` last; the
    special agent ranks it third. Free positions ascend by house index.

    ``special`` is a 0-based agent id (default: the last agent). ``second``
    optionally renames the even houses: role ``h_{2i}`` is played by
    0-based house ``second[i - 1]``.
    """
    if k < 2:
        raise StructureError("the block construction needs k >= 2")
    n = 2 * k + 1
    special = n - 1 if special is None else special
    if not 0 <= special < n:
        raise StructureError(f"no agent {special}")
    evens = [2 * i - 1 for i in range(1, k + 1)]  # 0-based ids of h_2, h_4, ..., h_2k
    if second is not None:
        if sorted(second) != sorted(evens):
            raise StructureError(f"second-choice houses must be a permutation of {evens}")
        evens = list(second)

    def even(i: int) -> int:  # 0-based id playing h_{2i}, with h_0 = h_{2k}
        return evens[(i - 1) % k]

    last = n - 1
    tops = []
    for i in range(1, k + 1):
        tops.append((2 * i - 2, even(i - 1)))  # a_{2i-1}
        tops.append((2 * i - 2, even(i)))      # a_{2i}
    tops.append(tops[-1])                     # a_{2k+1}
    rows = []
    for a, (first, sec) in enumerate(tops):
        if a == special:
            rows.append(_fill(n, (first, sec, last), ()))
        else:
            rows.append(_fill(n, (first, sec), (last,)))
    return PreferenceProfile(tuple(rows))


class CandidateAdversary(Oracle):
    """Adaptive oracle over an explicit family of profiles.

    Each answer keeps the largest group of candidates that agree with it;
    ties go to the answer that keeps ``protected`` hidden (for house queries,
    the larger rank), then to the smallest answer. The committed profile is
    the first surviving candidate.
    """

    def __init__(self, family: Sequence[PreferenceProfile], model: str = "next-best",
                 protected: Optional[int] = None, max_set_size: Optional[int] = None):
        if not family:
            raise StructureError("empty family")
        n = family[0].n
        if any(p.n != n for p in family):
            raise StructureError("family members differ in size")
        super().__init__(n, model, max_set_size)
        self.candidates: List[PreferenceProfile] = list(family)
        self.protected = protected

    def _narrow(self, answer_of: Callable[[PreferenceProfile], int], prefer_large: bool = False) -> int:
        groups: Dict[int, List[PreferenceProfile]] = {}
        for p in self.candidates:
            groups.setdefault(answer_of(p), []).append(p)

        def key(ans: int):
            hides = ans != self.protected
            order = -ans if prefer_large else ans
            return (-len(groups[ans]), not hides, order)

        best = min(groups, key=key)
        self.candidates = groups[best]
        return best

    def _answer_next(self, agent: int, position: int) -> int:
        return self._narrow(lambda p: p.house_at(agent, position))

    def _answer_rank(self, agent: int, rank: int) -> int:
        return self._narrow(lambda p: p.house_at(agent, rank))

    def _answer_house(self, agent: int, house: int) -> int:
        saved, self.protected = self.protected, None
        try:
            return self._narrow(lambda p: p.rank(agent, house), prefer_large=True)
        finally:
            self.protected = saved

    def _answer_set(self, agent: int, houses: FrozenSet[int]) -> int:
        return self._narrow(lambda p: p.best_of(agent, houses))

    def commit(self) -> PreferenceProfile:
        return self.candidates[0]

    def consistent_completion_exists(self) -> bool:
        return bool(self.candidates)


def _special_order(k: int) -> List[int]:
    n = 2 * k + 1
    return [n - 1] + list(range(n - 1))


def thm9_family(k: int) -> List[PreferenceProfile]:
    return [thm9_profile(k, s) for s in _special_order(k)]


def cor2_family(k: int) -> List[PreferenceProfile]:
    """The block instance under every special agent and every renaming of the even houses."""
    evens = [2 * i - 1 for i in range(1, k + 1)]
    out = []
    for perm in itertools.permutations(evens):
        for s in _special_order(k):
            out.append(thm9_profile(k, s, perm))
    return out


def thm9_adversary(k: int) -> CandidateAdversary:
    return CandidateAdversary(thm9_family(k), "next-best", protected=2 * k)


def cor2_hybrid_adversary(k: int) -> CandidateAdversary:
    return CandidateAdversary(cor2_family(k), "hybrid", protected=2 * k)


def cor2_setcompare_adversary(k: int) -> CandidateAdversary:
    return CandidateAdversary(cor2_family(k), "set-compare", protected=2 * k)


# ---------------------------------------------------------------------------
# first-choice / second-choice / special agents


def integer_cube_root(n: int) -> int:
    m = round(n ** (1 / 3))
    for c in (m - 1, m, m + 1):
        if c >= 0 and c ** 3 == n:
            return c
    raise StructureError(f"{n} is not a perfect cube")


@dataclass(frozen=True)
class Thm8Structure:
    """Roles of agents and houses.

    ``first[a]`` is the first choice of every agent. Special agent ``s`` owns
    special house ``own[s]``; second-choice agent ``b`` points at special
    agent ``target[b]`` whose first choice it lists early.
    """

    n: int
    m: int
    first_agents: Tuple[int, ...]
    second_agents: Tuple[int, ...]
    special_agents: Tuple[int, ...]
    first_houses: Tuple[int, ...]
    special_houses: Tuple[int, ...]
    first: Tuple[int, ...]
    own: Dict[int, int]
    target: Dict[int, int]

    @classmethod
    def build(cls, n: int, seed: Optional[int] = 0) -> "Thm8Structure":
        m = integer_cube_root(n)
        if m < 2:
            raise StructureError("need n >= 8")
        mm = m * m
        rng = random.Random(seed)
        agents = list(range(n))
        houses = list(range(n))
        rng.shuffle(agents)
        rng.shuffle(houses)
        a1 = tuple(sorted(agents[: n - 2 * mm]))
        a2 = tuple(sorted(agents[n - 2 * mm: n - mm]))
        sp = tuple(sorted(agents[n - mm:]))
        h1 = tuple(sorted(houses[: n - mm]))
        h2 = tuple(sorted(houses[n - mm:]))
        unique = list(h1)
        rng.shuffle(unique)
        first = [0] * n
        for a, h in zip(a1 + sp, unique):
            first[a] = h
        own = dict(zip(sp, rng.sample(h2, mm)))
        pointed = rng.sample(sp, mm)
        target = dict(zip(a2, pointed))
        for i, b in enumerate(a2):
            # share a first choice with a special agent other than the one pointed at
            first[b] = first[pointed[(i + 1) % mm]]
        return cls(n, m, a1, a2, sp, h1, h2, tuple(first), own, target)

    def role(self, a: int) -> str:
        if a in self.first_agents:
            return "first"
        if a in self.second_agents:
            return "second"
        return "special"

    def key_house(self, a: int) -> Optional[int]:
        """The house an agent must list among its first ``m`` positions."""
        if a in self.own:
            return self.own[a]
        if a in self.target:
            return self.first[self.target[a]]
        return None

    def allowed(self, a: int, rank: int) -> Set[int]:
        """Houses that may sit at 1-based ``rank`` for agent ``a``."""
        n, m = self.n, self.m
        tail = rank > n - m * m
        f = self.first[a]
        if rank == 1:
            return {f}
        h1 = set(self.first_houses) - {f}
        h2 = set(self.special_houses)
        if a in self.first_agents:
            return h2 if tail else h1
        if a in self.own:
            g = self.own[a]
            out = set(h1)
            if rank <= m:
                out.add(g)
            if tail:
                out |= h2 - {g}
            return out
        key = self.key_house(a)
        out = set(range(n)) - {f, key}
        if rank <= m:
            out.add(key)
        return out


class Thm8Adversary(Oracle):
    """Hides special houses behind first-choice answers for as long as a member of the family allows.

    Feasibility of an agent's revealed facts is a perfect matching between
    its free positions and free houses under ``Thm8Structure.allowed``.
    """

    def __init__(self, n: int, model: str = "hybrid", seed: Optional[int] = 0):
        if model == "set-compare":
            raise QueryError("the special-house adversary answers next-best and hybrid queries only")
        super().__init__(n, model)
        self.structure = Thm8Structure.build(n, seed)
        self._facts: List[Dict[int, int]] = [{} for _ in range(n)]  # rank -> house

    def feasible(self, a: int, facts: Dict[int, int]) -> bool:
        st = self.structure
        n = self.n
        if len(set(facts.values())) != len(facts):
            return False
        if any(h not in st.allowed(a, r) for r, h in facts.items()):
            return False
        ranks = [r for r in range(1, n + 1) if r not in facts]
        used = set(facts.values())
        free = [h for h in range(n) if h not in used]
        col = {h: j for j, h in enumerate(free)}
        edges = [(i, col[h]) for i, r in enumerate(ranks) for h in st.allowed(a, r) if h in col]
        g = BipartiteGraph(len(ranks), len(free), frozenset(edges))
        return len(max_matching(g)) == len(ranks)

    def _options(self, a: int, rank: int) -> List[int]:
        facts = self._facts[a]
        return [h for h in range(self.n) if self.feasible(a, {**facts, rank: h})]

    def _reveal(self, a: int, rank: int) -> int:
        st = self.structure
        if rank in self._facts[a]:
            return self._facts[a][rank]
        options = self._options(a, rank)
        if not options:
            raise StructureError("adversary lost consistency")  # cannot happen
        key = st.key_house(a)
        if 1 < rank <= st.m:
            safe = [h for h in options if h in st.first_houses and h != key]
            if safe:
                options = safe
        self._facts[a][rank] = options[0]
        return options[0]

    def _answer_next(self, agent: int, position: int) -> int:
        return self._reveal(agent, position)

    def _answer_rank(self, agent: int, rank: int) -> int:
        return self._reveal(agent, rank)

    def _answer_house(self, agent: int, house: int) -> int:
        st = self.structure
        facts = self._facts[agent]
        known = {h: r for r, h in facts.items()}
        if house in known:
            return known[house]
        ranks = [r for r in range(1, self.n + 1) if r not in facts and self.feasible(agent, {**facts, r: house})]
        tail_start = self.n - st.m * st.m + 1
        if house in st.special_houses:
            late = [r for r in ranks if r >= tail_start]
            if late:
                ranks = late
        facts[ranks[0]] = house
        return ranks[0]

    def _answer_set(self, agent: int, houses: FrozenSet[int]) -> int:
        raise QueryError("set-compare queries are not supported by this adversary")

    def commit(self) -> PreferenceProfile:
        """Lexicographically smallest completion of every agent's revealed facts."""
        rows = []
        for a in range(self.n):
            facts = dict(self._facts[a])
            for r in range(1, self.n + 1):
                if r not in facts:
                    facts[r] = next(h for h in range(self.n) if self.feasible(a, {**facts, r: h}))
            rows.append(tuple(facts[r] for r in range(1, self.n + 1)))
        return PreferenceProfile(tuple(rows))

    def consistent_completion_exists(self) -> bool:
        return all(self.feasible(a, self._facts[a]) for a in range(self.n))


def thm8_adversary(n: int, model: str = "hybrid", seed: Optional[int] = 0) -> Thm8Adversary:
    return Thm8Adversary(n, model, seed)


def thm8_profile(n: int, seed: Optional[int] = 0) -> PreferenceProfile:
    """A member of the family: the adversary's completion before any query."""
    return Thm8Adversary(n, "hybrid", seed).commit()


FAMILIES = ("random", "thm9", "thm8")
