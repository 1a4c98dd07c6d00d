"""Dimension-bounded verification loops: decomposition by dimension
(``solve_partition``) and incremental refinement (``solve_inc``), with the
interpretation plumbing they share."""

from __future__ import annotations

import time
from typing import Iterable, Mapping, Optional, Union

from horndim.chc import (
    Atom, Clause, ConstrainedFact, Interpretation, Program, is_goal_pred, model_check, positional,
)
from horndim.constraints import ConstraintConj, equivalent, is_sat, project
from horndim.derivations import TraceTree, expand, feasible
from horndim.solver.oracles import (
    SAFE, UNKNOWN, UNSAFE, ContractViolation, OracleConfig, SafeResult, safe,
)
from horndim.specialize import Specialization, atleast, atmost, base_name, split_version

Facts = Union[Interpretation, Iterable[ConstrainedFact]]


def _facts(s: Facts) -> list[ConstrainedFact]:
    return list(s) if not isinstance(s, Interpretation) else list(s.facts.values())


def lift(s: Facts, arity: Optional[Mapping[str, int]] = None) -> Interpretation:
    """Merge the facts of all versions of a predicate into one disjunctive
    fact over the base predicate.

    With ``arity`` (the base program's predicate table), a version carrying
    one extra trailing argument has that dimension argument projected away,
    and base predicates absent from ``s`` get the empty relation.
    """
    grouped: dict[str, list[ConstraintConj]] = {}
    width: dict[str, int] = {}
    for f in _facts(s):
        if is_goal_pred(f.pred) or is_goal_pred(base_name(f.pred)):
            continue
        base = base_name(f.pred)
        n = f.arity
        if arity is not None and base in arity and arity[base] == f.arity - 1:
            n = f.arity - 1
        keep = f.head_vars[:n]
        target = positional(n)
        if width.setdefault(base, n) != n:
            raise ValueError(f"versions of {base} disagree on arity")
        bucket = grouped.setdefault(base, [])
        for d in f.disjuncts:
            d = project(d, keep) if n != f.arity else d
            d = d.rename(dict(zip(keep, target)))
            if is_sat(d) and not any(equivalent(d, e) for e in bucket):
                bucket.append(d)
    facts = {}
    for base, ds in grouped.items():
        facts[base] = ConstrainedFact(base, positional(width[base]), tuple(ds))
    if arity is not None:
        for q, n in arity.items():
            if not is_goal_pred(q) and q not in facts:
                facts[q] = ConstrainedFact.bottom(q, n)
    return Interpretation(facts)


def restrict(s: Facts, t: TraceTree, p: Program) -> Interpretation:
    """The facts of ``s`` whose predicate labels some node of ``t``.

    An unversioned fact also matches every version of its predicate.
    """
    labels = {a.pred for n in expand(p, t).nodes() if (a := n.atom) is not None}
    bases = {base_name(q) for q in labels}
    out = {}
    for f in _facts(s):
        tagged = split_version(f.pred)[1] is not None
        if f.pred in labels or (not tagged and f.pred in bases):
            out[f.pred] = f
    return Interpretation(out)


def _subst_targets(p: Program, f: ConstrainedFact) -> list[str]:
    table = p.predicates
    if f.pred in table:
        return [f.pred]
    return sorted(q for q, n in table.items()
                  if base_name(q) == f.pred and split_version(q)[1] is not None
                  and n in (f.arity, f.arity + 1))


def subst(p: Program, s: Facts) -> Program:
    """Replace the clauses of each predicate in ``s`` by its fact.

    A fact over a base predicate replaces every version of it in a
    dimension-specialized program, leaving the dimension argument free.
    The new clause reuses the id of the first clause it replaces.
    """
    replace: dict[str, ConstrainedFact] = {}
    for f in _facts(s):
        if is_goal_pred(f.pred):
            continue
        for q in _subst_targets(p, f):
            replace[q] = f
    out: list[Clause] = []
    done: set[str] = set()
    for c in p.clauses:
        q = c.head_pred
        if q not in replace:
            out.append(c)
            continue
        if q in done:
            continue
        done.add(q)
        out.extend(_fact_clauses(replace[q], q, p.predicates[q], c.id))
    taken = {c.id for c in out}
    for q in sorted(set(replace) - done):
        out.extend(_fact_clauses(replace[q], q, p.predicates[q], f"subst_{q}", taken))
    return p.with_clauses(out)


def _fact_clauses(f: ConstrainedFact, pred: str, n: int, cid: str,
                  taken: Iterable[str] = ()) -> list[Clause]:
    xs = positional(n)
    mapping = dict(zip(f.head_vars, xs))
    head = Atom(pred, xs)
    ds = f.disjuncts
    ids = [cid] if len(ds) == 1 else [f"{cid}_{i}" for i in range(1, len(ds) + 1)]
    taken = set(taken)
    if taken.intersection(ids):
        raise ValueError(f"clause id clash while substituting {pred}")
    return [Clause(i, head, d.rename(mapping)) for i, d in zip(ids, ds)]


def _map_trace(t: TraceTree, spec: Specialization, p: Program) -> TraceTree:
    mapped = t.map_ids(lambda cid: spec.provenance[cid])
    if not feasible(p, mapped):
        raise ContractViolation(f"counterexample {t} maps to infeasible {mapped}")
    return mapped


def _done(status: str, witness, info: dict, start: float) -> SafeResult:
    info["seconds"] = round(time.monotonic() - start, 3)
    return SafeResult(status, witness, info)


def solve_partition(p: Program, k0: int = 0, cfg: OracleConfig = OracleConfig()) -> SafeResult:
    """Split derivations of ``p`` at dimension ``k`` and query both halves,
    raising ``k`` while the upper half stays undecided."""
    if k0 < 0:
        raise ValueError("k0 must be non-negative")
    start = time.monotonic()
    carried: list[ConstrainedFact] = []
    queries: list[dict] = []
    info: dict = {"algorithm": "solve_partition", "queries": queries}
    for k in range(k0, cfg.max_k + 1):
        info["dimension_reached"] = k
        low = atmost(p, k)
        r = safe(low.program, cfg)
        queries.append({"k": k, "half": "at_most", "status": r.status})
        if r.status == UNSAFE:
            info["counterexample_in"] = str(r.witness)
            return _done(UNSAFE, _map_trace(r.witness, low, p), info, start)
        if r.status == UNKNOWN:
            return _done(UNKNOWN, None, info, start)
        # namespace by depth: the same version name can recur at every k
        carried.extend(_facts(r.witness))
        high = atleast(p, k + 1)
        r2 = safe(high.program, cfg)
        queries.append({"k": k, "half": "greater", "status": r2.status})
        if r2.status == UNSAFE:
            info["counterexample_in"] = str(r2.witness)
            return _done(UNSAFE, _map_trace(r2.witness, high, p), info, start)
        if r2.status == SAFE:
            model = lift(carried + _facts(r2.witness), p.predicates)
            ok, bad = model_check(p, model)
            info["model_checked"] = ok
            if not ok:
                info["model_violations"] = bad
            return _done(SAFE, model, info, start)
    info["reason"] = "dimension cap reached"
    return _done(UNKNOWN, None, info, start)


def solve_inc(p: Program, k0: int = 0, s0: Optional[Facts] = None,
              cfg: OracleConfig = OracleConfig()) -> SafeResult:
    """Solve ``p`` through its at-most-``k`` underapproximations, using the
    approximate solution ``s0`` for predicates it covers and discarding
    parts of it that produce spurious counterexamples."""
    if k0 < 0:
        raise ValueError("k0 must be non-negative")
    start = time.monotonic()
    s = Interpretation.from_facts(_facts(s0)) if s0 is not None else Interpretation()
    queries: list[dict] = []
    info: dict = {"algorithm": "solve_inc", "queries": queries}
    k = k0
    while k <= cfg.max_k:
        info["dimension_reached"] = k
        low = atmost(p, k)
        q = subst(low.program, s)
        r = safe(q, cfg)
        queries.append({"k": k, "substituted": sorted(f.pred for f in s), "status": r.status})
        if r.status == UNKNOWN:
            return _done(UNKNOWN, None, info, start)
        if r.status == UNSAFE:
            used = restrict(s, r.witness, q)
            if not len(used):
                info["counterexample_in"] = str(r.witness)
                return _done(UNSAFE, _map_trace(r.witness, low, p), info, start)
            queries[-1]["spurious"] = str(r.witness)
            s = Interpretation({f.pred: f for f in s if f.pred not in used})
            continue
        model = lift(r.witness, p.predicates)
        ok, _ = model_check(p, model)
        if ok:
            info["model_checked"] = True
            return _done(SAFE, model, info, start)
        s = r.witness
        k += 1
    info["reason"] = "dimension cap reached"
    return _done(UNKNOWN, None, info, start)
