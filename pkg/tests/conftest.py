import itertools
import random

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from housealloc.core import Hybrid, Matching, NextBest, PreferenceProfile, SetCompare

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@st.composite
def profiles(draw, min_n=1, max_n=5):
    n = draw(st.integers(min_n, max_n))
    rows = [tuple(draw(st.permutations(range(n)))) for _ in range(n)]
    return PreferenceProfile(tuple(rows))


@st.composite
def profile_and_matching(draw, min_n=1, max_n=5):
    p = draw(profiles(min_n, max_n))
    perm = draw(st.permutations(range(p.n)))
    return p, Matching.from_assignment(perm)


@st.composite
def hybrid_state(draw, min_n=1, max_n=4):
    p = draw(profiles(min_n, max_n))
    n = p.n
    positions = [draw(st.sets(st.integers(1, n), max_size=n)) for _ in range(n)]
    return p, Hybrid.from_positions(p, positions)


@st.composite
def nextbest_state(draw, min_n=1, max_n=4):
    p = draw(profiles(min_n, max_n))
    ks = [draw(st.integers(0, p.n)) for _ in range(p.n)]
    return p, NextBest.top_k(p, ks)


@st.composite
def setcompare_state(draw, min_n=1, max_n=4):
    p = draw(profiles(min_n, max_n))
    n = p.n
    rows = []
    for a in range(n):
        row = []
        for s in draw(st.lists(st.sets(st.integers(0, n - 1), min_size=1), max_size=3)):
            row.append((frozenset(s), p.best_of(a, s)))
        rows.append(tuple(row))
    return p, SetCompare(n, tuple(rows))


# ---------------------------------------------------------------------------
# independent brute-force helpers (no library algorithms)


def all_profiles(n):
    return [PreferenceProfile(rows) for rows in itertools.product(itertools.permutations(range(n)), repeat=n)]


def perfect_matchings(n):
    return [Matching.from_assignment(p) for p in itertools.permutations(range(n))]


def all_matchings(edges):
    """Every matching (including the empty one) inside an edge set."""
    edges = sorted(edges)
    out = []

    def rec(i, used_a, used_h, cur):
        if i == len(edges):
            out.append(tuple(cur))
            return
        rec(i + 1, used_a, used_h, cur)
        a, h = edges[i]
        if a not in used_a and h not in used_h:
            rec(i + 1, used_a | {a}, used_h | {h}, cur + [(a, h)])

    rec(0, frozenset(), frozenset(), [])
    return out


def rank_counts(profile, pairs):
    counts = [0] * profile.n
    for a, h in pairs:
        counts[profile.prefs[a].index(h)] += 1
    return tuple(counts)


def brute_rm_signature(profile):
    n = profile.n
    edges = [(a, h) for a in range(n) for h in range(n)]
    # perfect matchings dominate their subsets, so permutations suffice
    return max(rank_counts(profile, tuple(enumerate(p))) for p in itertools.permutations(range(n))) \
        if n <= 7 else max(rank_counts(profile, m) for m in all_matchings(edges))


def brute_dominated(profile, m):
    """Some other perfect matching is weakly better for all and strictly for one."""
    n = profile.n
    mine = m.assignment(n)
    pos = [{h: i for i, h in enumerate(row)} for row in profile.prefs]
    for perm in itertools.permutations(range(n)):
        if perm == mine:
            continue
        if all(pos[a][perm[a]] <= pos[a][mine[a]] for a in range(n)):
            return True
    return False


def rng_profile(rng, n):
    return PreferenceProfile(tuple(tuple(rng.sample(range(n), n)) for _ in range(n)))


def make_rng(seed):
    return random.Random(seed)
