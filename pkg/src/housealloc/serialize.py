"""JSON round-trips for instances, knowledge, matchings, traces and optima."""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Optional, Union

from .baseline import OptResult
from .core import Hybrid, Matching, NextBest, PartialKnowledge, PreferenceProfile, SetCompare, StructureError
from .elicit import ALGORITHMS, ElicitTrace, QueryRecord


def _plain(x: Any) -> Any:
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, (set, frozenset)):
        return sorted(_plain(v) for v in x)
    return x


def dumps(obj: Dict[str, Any]) -> str:
    """Stable text: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(_plain(obj), sort_keys=True, indent=2) + "\n"


def write_json(path: Union[str, Path], obj: Dict[str, Any]) -> None:
    Path(path).write_text(dumps(obj))


def read_json(path: Union[str, Path]) -> Dict[str, Any]:
    return json.loads(Path(path).read_text())


def profile_to_json(p: PreferenceProfile, **meta) -> Dict[str, Any]:
    return {"n": p.n, "preferences": [list(row) for row in p.prefs], **meta}


def profile_from_json(d: Dict[str, Any]) -> PreferenceProfile:
    p = PreferenceProfile.from_lists(d["preferences"])
    if "n" in d and d["n"] != p.n:
        raise StructureError(f"declared n={d['n']} but {p.n} preference lists given")
    return p


def matching_to_json(m: Matching):
    return [list(pair) for pair in m.pairs]


def matching_from_json(d) -> Matching:
    if isinstance(d, dict):
        d = d["matching"]
    return Matching.from_pairs(tuple(pair) for pair in d)


def knowledge_to_json(pk: PartialKnowledge) -> Dict[str, Any]:
    out: Dict[str, Any] = {"model": pk.model, "n": pk.n}
    if isinstance(pk, NextBest):
        out["prefixes"] = [list(p) for p in pk.prefixes]
    elif isinstance(pk, Hybrid):
        out["revealed"] = [[list(f) for f in row] for row in pk.revealed]
    else:
        out["answers"] = [[{"set": sorted(s), "winner": w} for s, w in row] for row in pk.answers]
    return out


def knowledge_from_json(d: Dict[str, Any]) -> PartialKnowledge:
    model, n = d["model"], d["n"]
    if model == "next-best":
        return NextBest(n, tuple(tuple(p) for p in d["prefixes"]))
    if model == "hybrid":
        return Hybrid(n, tuple(tuple(tuple(f) for f in row) for row in d["revealed"]))
    if model == "set-compare":
        return SetCompare(n, tuple(tuple((frozenset(q["set"]), q["winner"]) for q in row) for row in d["answers"]))
    raise StructureError(f"unknown model {model!r}")


def trace_to_json(t: ElicitTrace, profile: Optional[PreferenceProfile] = None, **meta) -> Dict[str, Any]:
    out = {
        "algorithm": t.algorithm,
        "model": ALGORITHMS[t.algorithm][0],
        "criterion": ALGORITHMS[t.algorithm][1],
        "matching": matching_to_json(t.matching),
        "query_count": t.query_count,
        "per_agent": list(t.per_agent),
        "wasted": t.wasted,
        "knowledge": knowledge_to_json(t.knowledge),
        "transcript": [{"kind": q.kind, "agent": q.agent, "arg": q.arg, "answer": q.answer, "wasted": q.wasted}
                       for q in t.transcript],
        "info": t.info,
        **meta,
    }
    if profile is not None:
        out["profile"] = profile_to_json(profile)
    return out


def trace_from_json(d: Dict[str, Any]) -> ElicitTrace:
    records = tuple(QueryRecord(q["kind"], q["agent"], tuple(q["arg"]) if isinstance(q["arg"], list) else q["arg"],
                                q["answer"], q["wasted"]) for q in d["transcript"])
    return ElicitTrace(d["algorithm"], matching_from_json(d["matching"]), d["query_count"], tuple(d["per_agent"]),
                       knowledge_from_json(d["knowledge"]), records, d.get("wasted", 0), dict(d.get("info", {})))


def opt_to_json(r: OptResult, **meta) -> Dict[str, Any]:
    return {"opt_count": r.opt_count, "model": r.model, "criterion": r.criterion,
            "witness_state": knowledge_to_json(r.witness_state),
            "witness_matching": matching_to_json(r.witness_matching),
            "states_checked": r.states_checked, **meta}
