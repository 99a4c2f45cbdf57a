"""Query oracles and online elicitation algorithms.

An algorithm only talks to an ``Oracle``: it never sees the profile. Every
query is logged, counted per agent and folded into the oracle's partial
knowledge, so a finished run can be certified against exactly what was asked.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Set, Tuple

from .core import (Hybrid, Matching, NextBest, PartialKnowledge, PreferenceProfile, SetCompare,
                   StructureError)
from .graph import EVEN, ODD, UNREACHABLE, BipartiteGraph, dm_decompose, max_matching
from .optima import has_cycle, rank_maximal_ranked

MODELS = ("next-best", "hybrid", "set-compare")


class QueryError(RuntimeError):
    """An algorithm asked something the oracle's model does not allow."""


@dataclass(frozen=True)
class QueryRecord:
    kind: str  # "next", "rank", "house" or "set"
    agent: int
    arg: object
    answer: int
    wasted: bool = False


class Oracle:
    """Bookkeeping shared by truthful and adversarial oracles.

    Subclasses supply the four ``_answer_*`` hooks.
    """

    def __init__(self, n: int, model: str = "hybrid", max_set_size: Optional[int] = None):
        if model not in MODELS:
            raise ValueError(f"unknown model {model!r}")
        self.n = n
        self.model = model
        self.max_set_size = max_set_size
        self.per_agent = [0] * n
        self.transcript: List[QueryRecord] = []
        self._prefix: List[List[int]] = [[] for _ in range(n)]
        self._rank: List[Dict[int, int]] = [{} for _ in range(n)]  # house -> rank
        self._answers: List[List[Tuple[FrozenSet[int], int]]] = [[] for _ in range(n)]

    # hooks -----------------------------------------------------------------
    def _answer_next(self, agent: int, position: int) -> int:
        raise NotImplementedError

    def _answer_rank(self, agent: int, rank: int) -> int:
        raise NotImplementedError

    def _answer_house(self, agent: int, house: int) -> int:
        raise NotImplementedError

    def _answer_set(self, agent: int, houses: FrozenSet[int]) -> int:
        raise NotImplementedError

    # bookkeeping -------------------------------------------------------------
    def _require(self, model: str) -> None:
        if self.model != model:
            raise QueryError(f"{model} query sent to a {self.model} oracle")

    def _check_agent(self, agent: int) -> None:
        if not 0 <= agent < self.n:
            raise QueryError(f"no agent {agent}")

    def _log(self, kind: str, agent: int, arg: object, answer: int, wasted: bool = False) -> int:
        self.per_agent[agent] += 1
        self.transcript.append(QueryRecord(kind, agent, arg, answer, wasted))
        return answer

    @property
    def total(self) -> int:
        return len(self.transcript)

    @property
    def wasted(self) -> int:
        return sum(q.wasted for q in self.transcript)

    # queries -----------------------------------------------------------------
    def next_best(self, agent: int) -> int:
        self._require("next-best")
        self._check_agent(agent)
        prefix = self._prefix[agent]
        if len(prefix) >= self.n:
            raise QueryError(f"agent {agent} has no unrevealed house left")
        h = self._answer_next(agent, len(prefix) + 1)
        prefix.append(h)
        return self._log("next", agent, None, h)

    def rank_query(self, agent: int, rank: int) -> int:
        self._require("hybrid")
        self._check_agent(agent)
        if not 1 <= rank <= self.n:
            raise QueryError(f"rank {rank} out of range")
        known = {r: h for h, r in self._rank[agent].items()}
        if rank in known:
            return self._log("rank", agent, rank, known[rank], wasted=True)
        h = self._answer_rank(agent, rank)
        self._rank[agent][h] = rank
        return self._log("rank", agent, rank, h)

    def house_query(self, agent: int, house: int) -> int:
        self._require("hybrid")
        self._check_agent(agent)
        if not 0 <= house < self.n:
            raise QueryError(f"house {house} out of range")
        if house in self._rank[agent]:
            return self._log("house", agent, house, self._rank[agent][house], wasted=True)
        r = self._answer_house(agent, house)
        self._rank[agent][house] = r
        return self._log("house", agent, house, r)

    def set_query(self, agent: int, houses: Iterable[int]) -> int:
        self._require("set-compare")
        self._check_agent(agent)
        s = frozenset(houses)
        if not s or any(not 0 <= h < self.n for h in s):
            raise QueryError(f"bad query set {sorted(s)}")
        if self.max_set_size is not None and len(s) > self.max_set_size:
            raise QueryError(f"query set of size {len(s)} exceeds {self.max_set_size}")
        repeated = any(s == t for t, _ in self._answers[agent])
        w = self._answer_set(agent, s)
        if not repeated:
            self._answers[agent].append((s, w))
        return self._log("set", agent, tuple(sorted(s)), w, wasted=repeated)

    def knowledge(self) -> PartialKnowledge:
        if self.model == "next-best":
            return NextBest(self.n, tuple(tuple(p) for p in self._prefix))
        if self.model == "hybrid":
            return Hybrid(self.n, tuple(tuple((r, h) for h, r in row.items()) for row in self._rank))
        return SetCompare(self.n, tuple(tuple(row) for row in self._answers))


class QueryOracle(Oracle):
    """Answers truthfully from a hidden profile."""

    def __init__(self, profile: PreferenceProfile, model: str = "hybrid", max_set_size: Optional[int] = None):
        super().__init__(profile.n, model, max_set_size)
        self._hidden = profile

    @property
    def hidden(self) -> PreferenceProfile:
        return self._hidden

    def _answer_next(self, agent: int, position: int) -> int:
        return self._hidden.house_at(agent, position)

    def _answer_rank(self, agent: int, rank: int) -> int:
        return self._hidden.house_at(agent, rank)

    def _answer_house(self, agent: int, house: int) -> int:
        return self._hidden.rank(agent, house)

    def _answer_set(self, agent: int, houses: FrozenSet[int]) -> int:
        return self._hidden.best_of(agent, houses)


@dataclass(frozen=True)
class ElicitTrace:
    algorithm: str
    matching: Matching
    query_count: int
    per_agent: Tuple[int, ...]
    knowledge: PartialKnowledge
    transcript: Tuple[QueryRecord, ...]
    wasted: int = 0
    info: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.query_count != sum(self.per_agent):
            raise StructureError("query count does not match per-agent counts")


def _finish(name: str, oracle: Oracle, m: Matching, **info) -> ElicitTrace:
    return ElicitTrace(name, m, oracle.total, tuple(oracle.per_agent), oracle.knowledge(),
                       tuple(oracle.transcript), oracle.wasted, info)


def _missing_house(known: Iterable[int], n: int) -> int:
    seen = set(known)
    return next(h for h in range(n) if h not in seen)


# ---------------------------------------------------------------------------
# Pareto optimality


def elicit_po_setcompare(oracle: Oracle) -> ElicitTrace:
    """Serial dictatorship in index order, one set query per dictator."""
    n = oracle.n
    remaining = list(range(n))
    pairs = []
    for a in range(n):
        h = remaining[0] if len(remaining) == 1 else oracle.set_query(a, remaining)
        remaining.remove(h)
        pairs.append((a, h))
    return _finish("po-setcompare", oracle, Matching.from_pairs(pairs))


def elicit_po_setcompare_k(oracle: Oracle, k: int) -> ElicitTrace:
    """Serial dictatorship where each query holds at most ``k`` houses.

    The running winner is carried into the next block of ``k - 1`` houses.
    """
    if k < 2:
        raise ValueError("set size bound k must be at least 2")
    n = oracle.n
    remaining = list(range(n))
    pairs = []
    for a in range(n):
        best = remaining[0]
        rest = remaining[1:]
        while rest:
            block, rest = rest[: k - 1], rest[k - 1:]
            best = oracle.set_query(a, [best] + block)
        remaining.remove(best)
        pairs.append((a, best))
    return _finish("po-setcompare-k", oracle, Matching.from_pairs(pairs), k=k)


def ceil_pow(n: int, e: Fraction) -> int:
    """Exact ``ceil(n ** e)`` for a positive integer ``n`` and rational ``e``."""
    e = Fraction(e)
    if n < 1:
        raise ValueError("n must be positive")
    if e <= 0 or n == 1:
        # n**e <= 1 and it is exactly 1 when e == 0 or n == 1
        return 1
    p, q = e.numerator, e.denominator
    target = n ** p
    lo, hi = 1, n ** (-(-p // q)) + 1
    while lo < hi:
        mid = (lo + hi) // 2
        if mid ** q >= target:
            hi = mid
        else:
            lo = mid + 1
    return lo


@dataclass(frozen=True)
class Alg1Config:
    """Checkpoint schedule for the hybrid Pareto elicitation.

    ``c_{j+1} = (3 c_j + 1) / 2 + c0 - 1``; the schedule grows iff ``c0 > 1/3``.
    """

    c0: Fraction = Fraction(7, 20)
    stop_when_perfect: bool = False

    def __post_init__(self) -> None:
        c0 = Fraction(self.c0)
        object.__setattr__(self, "c0", c0)
        if c0 <= Fraction(1, 3):
            raise ValueError(f"c0 must exceed 1/3, got {c0}")

    def next_exponent(self, c: Fraction) -> Fraction:
        return (3 * c + 1) / 2 + self.c0 - 1

    def exponents(self, n: int) -> List[Fraction]:
        """``c_0, c_1, ...`` up to the first one whose checkpoint passes ``n``."""
        out = [self.c0]
        # exponents above 1 put the checkpoint past n (for n = 1 every ceiling is 1)
        while out[-1] <= 1 and ceil_pow(n, out[-1]) <= n:
            out.append(self.next_exponent(out[-1]))
        return out

    def checkpoints(self, n: int) -> List[int]:
        return [ceil_pow(n, c) for c in self.exponents(n) if ceil_pow(n, c) <= n]

    def threshold(self, n: int, c: Fraction) -> int:
        """Break when ``|M| >= n - ceil(n ** ((c + 1) / 2))``."""
        return n - ceil_pow(n, (c + 1) / 2)


def pareto_within(m: Matching, ranks: Dict[Tuple[int, int], int], n: int) -> Matching:
    """Remove improving moves and trading cycles along known edges.

    Cardinality never changes and the total rank strictly drops with every
    step, so the loop terminates.
    """
    mine: List[Optional[int]] = list(m.assignment(n))
    while True:
        owner = {h: a for a, h in enumerate(mine) if h is not None}
        moved = False
        for a in range(n):
            if mine[a] is None:
                continue
            cur = ranks[(a, mine[a])]
            better = sorted((r, h) for (b, h), r in ranks.items() if b == a and r < cur and h not in owner)
            if better:
                mine[a] = better[0][1]
                moved = True
                break
        if moved:
            continue
        arcs = {a: [] for a in range(n) if mine[a] is not None}
        for a in arcs:
            cur = ranks[(a, mine[a])]
            for (b, h), r in ranks.items():
                if b == a and r < cur and h in owner:
                    arcs[a].append(owner[h])
        cycle = _find_cycle(arcs)
        if cycle is None:
            return Matching.from_assignment(mine)
        houses = [mine[b] for b in cycle[1:] + cycle[:1]]
        for a, h in zip(cycle, houses):
            mine[a] = h


def _find_cycle(arcs: Dict[int, List[int]]) -> Optional[List[int]]:
    """Some directed cycle as a list of vertices, or ``None``."""
    if not has_cycle(arcs):
        return None
    colour: Dict[int, int] = {}
    stack: List[int] = []

    def dfs(v: int) -> Optional[List[int]]:
        colour[v] = 1
        stack.append(v)
        for w in sorted(arcs.get(v, ())):
            if colour.get(w) == 1:
                return stack[stack.index(w):]
            if w not in colour:
                found = dfs(w)
                if found:
                    return found
        stack.pop()
        colour[v] = 2
        return None

    for v in sorted(arcs):
        if v not in colour:
            found = dfs(v)
            if found:
                return found
    return None


def elicit_po_hybrid(oracle: Oracle, cfg: Optional[Alg1Config] = None) -> ElicitTrace:
    """Reveal ranks round by round, stop at a checkpoint once the matching is large, then fill in.

    Leftover agents pick their best unmatched house via house queries.
    """
    cfg = cfg or Alg1Config()
    n = oracle.n
    ranks: Dict[Tuple[int, int], int] = {}
    m = Matching(())
    exps = cfg.exponents(n)
    j = 0
    break_round = None
    checks = []
    for i in range(1, n + 1):
        for a in range(n):
            if i == n:
                h = _missing_house((x for (b, x) in ranks if b == a), n)
            else:
                h = oracle.rank_query(a, i)
            ranks[(a, h)] = i
        g = BipartiteGraph(n, n, frozenset(ranks))
        m = pareto_within(max_matching(g, m), ranks, n)
        if cfg.stop_when_perfect and len(m) == n:
            break_round = i
            break
        if j < len(exps) and i >= ceil_pow(n, exps[j]):
            limit = cfg.threshold(n, exps[j])
            checks.append((i, exps[j], len(m), limit))
            if len(m) >= limit:
                break_round = i
                break
            j += 1
    taken = {h for _, h in m.pairs}
    pairs = list(m.pairs)
    matched = {a for a, _ in pairs}
    for a in range(n):
        if a in matched:
            continue
        best = None
        for h in range(n):
            if h in taken:
                continue
            r = ranks.get((a, h))
            if r is None:
                r = oracle.house_query(a, h)
                ranks[(a, h)] = r
            if best is None or r < best[0]:
                best = (r, h)
        pairs.append((a, best[1]))
        taken.add(best[1])
    return _finish("po-hybrid", oracle, Matching.from_pairs(pairs), break_round=break_round,
                   checks=checks, c0=str(cfg.c0))


# ---------------------------------------------------------------------------
# rank-maximality


@dataclass
class RmElicitState:
    n: int
    unfinished: Set[int]
    available: Set[int]
    edges: Set[Tuple[int, int]] = field(default_factory=set)
    forbidden: Set[Tuple[int, int]] = field(default_factory=set)
    matching: Matching = Matching(())
    stale: int = 0

    @classmethod
    def start(cls, n: int) -> "RmElicitState":
        return cls(n, set(range(n)), set(range(n)))

    def offer(self, a: int, h: int) -> bool:
        if h in self.available and (a, h) not in self.forbidden:
            self.edges.add((a, h))
            return True
        return False

    def augment(self) -> None:
        g = BipartiteGraph(self.n, self.n, frozenset(self.edges))
        self.matching = max_matching(g, self.matching)

    def retire(self) -> None:
        """Decompose, retire odd/unreachable vertices and forbid O-O and O-U edges."""
        g = BipartiteGraph(self.n, self.n, frozenset(self.edges))
        dm = dm_decompose(g, self.matching)
        self.unfinished = {a for a in self.unfinished if dm.agents[a] == EVEN}
        self.available = {h for h in self.available if dm.houses[h] == EVEN}
        for a, h in list(self.edges):
            ta, th = dm.agents[a], dm.houses[h]
            if (ta == ODD and th in (ODD, UNREACHABLE)) or (th == ODD and ta == UNREACHABLE):
                self.edges.discard((a, h))
                self.forbidden.add((a, h))


def _two_agents(oracle: Oracle, ask: Callable[[int], int], name: str) -> ElicitTrace:
    h = ask(0)
    return _finish(name, oracle, Matching.from_pairs([(0, h), (1, 1 - h)]))


def elicit_rm_nextbest(oracle: Oracle) -> ElicitTrace:
    """Irving's rounds driven by next-best queries.

    Agents that leave the even set stop being asked. An agent still
    unfinished in round ``n`` gets its last house without a query.
    """
    n = oracle.n
    name = "rm-nextbest"
    if n == 1:
        return _finish(name, oracle, Matching.from_pairs([(0, 0)]))
    if n == 2:
        return _two_agents(oracle, oracle.next_best, name)
    st = RmElicitState.start(n)
    revealed: List[List[int]] = [[] for _ in range(n)]
    for i in range(1, n + 1):
        for a in sorted(st.unfinished):
            h = _missing_house(revealed[a], n) if i == n else oracle.next_best(a)
            revealed[a].append(h)
            st.offer(a, h)
        st.augment()
        st.retire()
        if not st.unfinished:
            break
    return _finish(name, oracle, st.matching)


def elicit_rm_hybrid(oracle: Oracle, newly_added_only: bool = False) -> ElicitTrace:
    """Rank-query rounds with a counter of rounds that matched nothing of their rank.

    Once the counter reaches the number of available houses, the unfinished
    agents are asked the rank of every available house and a rank-maximal
    matching is computed on the known edges. With ``newly_added_only`` the
    counter instead ticks when no edge added this round ends up matched.
    """
    n = oracle.n
    name = "rm-hybrid"
    if n == 1:
        return _finish(name, oracle, Matching.from_pairs([(0, 0)]))
    if n == 2:
        return _two_agents(oracle, lambda a: oracle.rank_query(a, 1), name)
    st = RmElicitState.start(n)
    ranks: Dict[Tuple[int, int], int] = {}
    break_round = None
    for i in range(1, n + 1):
        added = set()
        for a in sorted(st.unfinished):
            if i == n:
                h = _missing_house((x for (b, x) in ranks if b == a), n)
            else:
                h = oracle.rank_query(a, i)
            ranks[(a, h)] = i
            if st.offer(a, h):
                added.add((a, h))
        st.augment()
        if newly_added_only:
            hit = any(p in added for p in st.matching.pairs)
        else:
            hit = any(ranks[p] == i for p in st.matching.pairs)
        if not hit:
            st.stale += 1
        if st.stale >= len(st.available):
            break_round = i
            break
        st.retire()
    if st.unfinished:
        for a in sorted(st.unfinished):
            for h in sorted(st.available):
                if (a, h) in ranks:
                    continue
                known = [x for (b, x) in ranks if b == a]
                if len(known) == n - 1:
                    # the last unknown house of a sits at the last unknown rank
                    used = {ranks[(a, x)] for x in known}
                    ranks[(a, h)] = next(r for r in range(1, n + 1) if r not in used)
                else:
                    ranks[(a, h)] = oracle.house_query(a, h)
        allowed = set(st.edges)
        for a in st.unfinished:
            allowed.update((a, h) for h in st.available)
        allowed -= st.forbidden
        final, _ = rank_maximal_ranked(n, n, {p: ranks[p] for p in allowed}, n)
    else:
        final = st.matching
    return _finish(name, oracle, final, break_round=break_round, stale=st.stale)


ALGORITHMS: Dict[str, Tuple[str, str]] = {
    # name -> (query model, criterion certified)
    "po-setcompare": ("set-compare", "npo"),
    "po-setcompare-k": ("set-compare", "npo"),
    "po-hybrid": ("hybrid", "npo"),
    "rm-nextbest": ("next-best", "nrm"),
    "rm-hybrid": ("hybrid", "nrm"),
}


def run_algorithm(name: str, oracle: Oracle, k: Optional[int] = None, cfg: Optional[Alg1Config] = None) -> ElicitTrace:
    if name not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {name!r}; choose from {sorted(ALGORITHMS)}")
    if oracle.model != ALGORITHMS[name][0]:
        raise QueryError(f"{name} needs a {ALGORITHMS[name][0]} oracle, got {oracle.model}")
    if name == "po-setcompare":
        return elicit_po_setcompare(oracle)
    if name == "po-setcompare-k":
        return elicit_po_setcompare_k(oracle, max(oracle.n, 2) if k is None else k)
    if name == "po-hybrid":
        return elicit_po_hybrid(oracle, cfg)
    if name == "rm-nextbest":
        return elicit_rm_nextbest(oracle)
    return elicit_rm_hybrid(oracle)


def certify(trace: ElicitTrace, method: str = "poly") -> bool:
    """Check the output against the knowledge the run actually gathered."""
    from .necessity import is_necessarily_optimal, npo_bruteforce, nrm_bruteforce
    criterion = ALGORITHMS[trace.algorithm][1]
    pk = trace.knowledge
    if method == "bruteforce":
        check = npo_bruteforce if criterion == "npo" else nrm_bruteforce
        return check(pk, trace.matching)
    return is_necessarily_optimal(pk, trace.matching, criterion)
