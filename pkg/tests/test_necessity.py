import pytest
from hypothesis import given
from hypothesis import strategies as st

from housealloc.adversary import thm9_profile
from housealloc.core import (Hybrid, Matching, NextBest, PreferenceProfile, SetCompare, StructureError, full_knowledge,
                             signature)
from housealloc.elicit import QueryOracle, elicit_po_setcompare
from housealloc.necessity import (EnumerationBoundError, completion_count, enumerate_completions, hybrid_arc,
                                  is_npo, is_npo_hybrid, is_npo_setcompare, is_nrm_hybrid,
                                  min_queries_lower_bound_po, npo_bruteforce, nrm_bruteforce, nrm_exists_hybrid,
                                  nrm_matchings_bruteforce, sd_certificate)
from housealloc.optima import is_pareto_optimal, is_rank_maximal, rank_maximal, serial_dictatorship

from conftest import hybrid_state, nextbest_state, perfect_matchings, profiles, setcompare_state

EMPTY2 = Hybrid.empty(2)
HALF2 = Hybrid(2, (((1, 0),), ()))
DIAG2 = Matching.from_assignment((0, 1))


def test_completion_counts():
    assert completion_count(EMPTY2) == 4
    assert len(list(enumerate_completions(EMPTY2))) == 4
    p = PreferenceProfile(((2, 0, 1), (0, 1, 2), (1, 2, 0)))
    assert len(list(enumerate_completions(full_knowledge(p, "next-best")))) == 1
    assert completion_count(Hybrid(3, (((1, 0),), (), ()))) == 72


def test_enumeration_refuses_large_instances():
    with pytest.raises(EnumerationBoundError) as err:
        completion_count(Hybrid.empty(7))
    assert err.value.estimate > 0
    with pytest.raises(EnumerationBoundError):
        list(enumerate_completions(Hybrid.empty(6)))


@given(hybrid_state(max_n=3))
def test_completions_are_distinct_and_consistent(ps):
    _, pk = ps
    seen = [c.prefs for c in enumerate_completions(pk)]
    assert len(seen) == len(set(seen)) == completion_count(pk)


def test_arc_conditions_table():
    # agent 0 of n=4 with ranks 1 and 4 revealed: k=2, l=3
    pk = Hybrid(4, (((1, 0), (4, 3)), (), (), ()))
    assert hybrid_arc(pk, 0, 3, 0)          # both revealed, other higher
    assert not hybrid_arc(pk, 0, 0, 3)      # both revealed, own higher
    assert hybrid_arc(pk, 0, 3, 1)          # own revealed at 4, free rank 2 above it
    assert not hybrid_arc(pk, 0, 0, 1)      # own at rank 1, nothing above
    assert hybrid_arc(pk, 0, 1, 0)          # own free (ranks 2..3), other revealed at 1
    assert not hybrid_arc(pk, 0, 1, 3)      # own free cannot sink below the rank-4 house
    assert hybrid_arc(pk, 0, 1, 2)          # both free


def test_arc_condition_own_unrevealed_other_revealed():
    pk = Hybrid(3, (((2, 0),), (), ()))
    assert hybrid_arc(pk, 0, 1, 0)          # own can fall to rank 3 below the rank-2 house
    tight = Hybrid(3, (((3, 0),), (), ()))
    assert not hybrid_arc(tight, 0, 1, 0)


def test_npo_examples():
    assert is_npo_hybrid(HALF2, DIAG2)
    assert npo_bruteforce(HALF2, DIAG2, method="enumerate")
    for m in perfect_matchings(2):
        assert not is_npo_hybrid(EMPTY2, m)
        assert not npo_bruteforce(EMPTY2, m, method="enumerate")


def test_npo_requires_perfect():
    with pytest.raises(StructureError):
        is_npo_hybrid(EMPTY2, Matching.from_pairs([(0, 0)]))


def test_npo_setcompare_examples():
    n = 3
    forced = SetCompare(n, tuple(((frozenset(range(n)), a),) for a in range(n)))
    assert is_npo_setcompare(forced, Matching.from_assignment(range(n)))
    for m in perfect_matchings(n):
        assert not is_npo_setcompare(SetCompare.empty(n), m)


@given(profiles(max_n=5))
def test_npo_setcompare_sd_replay(p):
    t = elicit_po_setcompare(QueryOracle(p, "set-compare"))
    assert is_npo_setcompare(t.knowledge, t.matching)


@given(profiles(max_n=4))
def test_full_knowledge_agrees_with_offline(p):
    pk = full_knowledge(p, "hybrid")
    for m in perfect_matchings(p.n):
        assert is_npo(pk, m) == is_pareto_optimal(p, m)
        assert is_nrm_hybrid(pk, m) == is_rank_maximal(p, m)
    found = nrm_exists_hybrid(pk)
    assert found is not None and is_rank_maximal(p, found)


def test_sd_certificate_examples():
    assert sd_certificate(HALF2, DIAG2) == (0, 1)
    assert sd_certificate(EMPTY2, DIAG2) is None
    p = PreferenceProfile(((1, 0, 2), (1, 2, 0), (0, 2, 1)))
    m = serial_dictatorship(p, (0, 1, 2))
    sigma = sd_certificate(full_knowledge(p), m)
    assert sigma is not None and serial_dictatorship(p, sigma) == m


@given(hybrid_state(max_n=4), st.data())
def test_sd_certificate_sound(ps, data):
    _, pk = ps
    m = Matching.from_assignment(data.draw(st.permutations(range(pk.n))))
    sigma = sd_certificate(pk, m)
    if sigma is None:
        assert not is_npo_hybrid(pk, m)
        return
    for c in enumerate_completions(pk):
        assert serial_dictatorship(c, sigma) == m


def test_lower_bound_examples():
    n = 5
    p = PreferenceProfile(tuple(tuple([a] + [h for h in range(n) if h != a]) for a in range(n)))
    assert min_queries_lower_bound_po(full_knowledge(p), Matching.from_assignment(range(n))) == n - 1
    assert min_queries_lower_bound_po(Hybrid.empty(1), Matching.from_pairs([(0, 0)])) == 0
    with pytest.raises(StructureError):
        min_queries_lower_bound_po(EMPTY2, DIAG2)


def test_nrm_examples():
    p = thm9_profile(2)
    pk = NextBest.top_k(p, [3] * 5)
    m, sig = rank_maximal(p)
    assert is_nrm_hybrid(pk, m)
    found = nrm_exists_hybrid(pk)
    assert found is not None and rank_maximal(p)[1] == sig
    assert signature(p, found) == (2, 2, 1, 0, 0)
    for m2 in perfect_matchings(2):
        assert not is_nrm_hybrid(EMPTY2, m2)
        assert not nrm_bruteforce(EMPTY2, m2, method="enumerate")
    assert nrm_exists_hybrid(EMPTY2) is None


def test_nrm_needs_lone_rank_deduction():
    # an agent with only its last rank unrevealed must not be treated as free
    p = PreferenceProfile(((0, 1, 2), (0, 2, 1), (2, 1, 0)))
    pk = Hybrid.from_positions(p, [{1, 2}, {1}, {1}])
    brute = nrm_matchings_bruteforce(pk)
    found = nrm_exists_hybrid(pk)
    assert (found is None) == (not brute)


@given(hybrid_state(max_n=4), st.data())
def test_hybrid_verifiers_match_bruteforce(ps, data):
    _, pk = ps
    m = Matching.from_assignment(data.draw(st.permutations(range(pk.n))))
    assert is_npo_hybrid(pk, m) == npo_bruteforce(pk, m)
    assert is_nrm_hybrid(pk, m) == nrm_bruteforce(pk, m)
    found = nrm_exists_hybrid(pk)
    brute = nrm_matchings_bruteforce(pk)
    assert (found is None) == (not brute)
    if found is not None:
        assert found.pairs in {b.pairs for b in brute}


@given(nextbest_state(max_n=4), st.data())
def test_nextbest_verifiers_match_bruteforce(ps, data):
    _, pk = ps
    m = Matching.from_assignment(data.draw(st.permutations(range(pk.n))))
    assert is_npo(pk, m) == npo_bruteforce(pk, m)
    assert is_nrm_hybrid(pk, m) == nrm_bruteforce(pk, m)
    assert (nrm_exists_hybrid(pk) is None) == (not nrm_matchings_bruteforce(pk))


@given(setcompare_state(max_n=4), st.data())
def test_setcompare_verifier_matches_bruteforce(ps, data):
    _, pk = ps
    m = Matching.from_assignment(data.draw(st.permutations(range(pk.n))))
    assert is_npo_setcompare(pk, m) == npo_bruteforce(pk, m)


@given(hybrid_state(max_n=3), st.data())
def test_factored_bruteforce_matches_enumeration(ps, data):
    _, pk = ps
    m = Matching.from_assignment(data.draw(st.permutations(range(pk.n))))
    assert npo_bruteforce(pk, m) == npo_bruteforce(pk, m, method="enumerate")
    assert nrm_bruteforce(pk, m) == nrm_bruteforce(pk, m, method="enumerate")


@given(hybrid_state(max_n=4), st.data())
def test_monotone_under_new_facts(ps, data):
    p, pk = ps
    n = pk.n
    m = Matching.from_assignment(data.draw(st.permutations(range(n))))
    a = data.draw(st.integers(0, n - 1))
    free = pk.unrevealed_ranks(a)
    if not free:
        return
    r = data.draw(st.sampled_from(free))
    more = pk.reveal(a, r, p.house_at(a, r))
    if is_npo_hybrid(pk, m):
        assert is_npo_hybrid(more, m)
    if is_nrm_hybrid(pk, m):
        assert is_nrm_hybrid(more, m)
