"""Online preference elicitation for house allocation.

Necessarily Pareto optimal and necessarily rank-maximal matchings under
next-best, hybrid and set-compare queries, with brute-force oracles and
offline-optimal baselines for competitive ratios.
"""

from .core import (Hybrid, Matching, NextBest, PartialKnowledge, PreferenceProfile, SetCompare, StructureError,
                   is_consistent, rank_dominates, signature)
from .elicit import (ALGORITHMS, Alg1Config, ElicitTrace, QueryOracle, elicit_po_hybrid, elicit_po_setcompare,
                     elicit_po_setcompare_k, elicit_rm_hybrid, elicit_rm_nextbest, run_algorithm)
from .optima import is_pareto_optimal, is_rank_maximal, rank_maximal, serial_dictatorship

__all__ = [
    "ALGORITHMS", "Alg1Config", "ElicitTrace", "Hybrid", "Matching", "NextBest", "PartialKnowledge",
    "PreferenceProfile", "QueryOracle", "SetCompare", "StructureError", "elicit_po_hybrid",
    "elicit_po_setcompare", "elicit_po_setcompare_k", "elicit_rm_hybrid", "elicit_rm_nextbest",
    "is_consistent", "is_pareto_optimal", "is_rank_maximal", "rank_dominates", "rank_maximal",
    "run_algorithm", "serial_dictatorship", "signature",
]
