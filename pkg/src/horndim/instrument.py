"""Dimension instrumentation: every predicate gets a trailing argument
holding the tree dimension of its derivation."""

from __future__ import annotations

from typing import Optional, Sequence

from horndim.chc import GOAL, Atom, Clause, Program
from horndim.constraints import ConstraintConj, LinConstraint
from horndim.constraints.linear import EQ, LE


class InstrumentationError(ValueError):
    pass


def _eq(a: str, b: str, k: int = 0) -> LinConstraint:
    """a = b + k"""
    return LinConstraint.make({a: 1, b: -1}, -k, EQ)


def _ge(a: str, b: str, k: int = 0) -> LinConstraint:
    """a >= b + k"""
    return LinConstraint.make({b: 1, a: -1}, k, LE)


def unfold_dim(child_dims: Sequence[str], out: str) -> list[ConstraintConj]:
    """Disjuncts defining ``out`` as the dimension of a node whose children
    have dimensions ``child_dims``."""
    n = len(child_dims)
    if n == 0:
        return [ConstraintConj([LinConstraint.make({out: 1}, 0, EQ)])]
    if n == 1:
        return [ConstraintConj([_eq(out, child_dims[0])])]
    out_list = []
    for i, ki in enumerate(child_dims):
        cs = [_eq(out, ki)]
        cs += [_ge(ki, kj, 1) for j, kj in enumerate(child_dims) if j != i]
        out_list.append(ConstraintConj(cs))
    for i in range(n):
        for j in range(i + 1, n):
            ki, kj = child_dims[i], child_dims[j]
            cs = [_eq(ki, kj), _eq(out, ki, 1)]
            cs += [_ge(ki, kl) for l, kl in enumerate(child_dims) if l not in (i, j)]
            out_list.append(ConstraintConj(cs))
    return out_list


def n_disjuncts(arity: int) -> int:
    return 1 if arity <= 1 else arity + arity * (arity - 1) // 2


def _dim_names(clause: Clause) -> tuple[str, list[str]]:
    taken = clause.vars
    base = "K"
    while True:
        names = [base] + [f"{base}{i}" for i in range(1, len(clause.body) + 1)]
        if not taken.intersection(names):
            return names[0], names[1:]
        base += "_"


def instrument_with_provenance(p: Program, properties: Optional[Program] = None
                               ) -> tuple[Program, dict[str, str]]:
    """Instrument ``p`` and append ``properties`` (clauses already written
    over the instrumented predicates).  Also returns new-id -> old-id."""
    if p.instrumented:
        raise InstrumentationError("program is already dimension-instrumented")
    clashes = sorted(q for q in p.predicates if "__" in q)
    if clashes:
        raise InstrumentationError(f"predicate names reserved for versions: {clashes}")
    out: list[Clause] = []
    prov: dict[str, str] = {}
    for c in p.clauses:
        k, ks = _dim_names(c)
        head = Atom(GOAL, (k,)) if c.head is None else Atom(c.head.pred, c.head.args + (k,))
        body = tuple(Atom(a.pred, a.args + (ki,)) for a, ki in zip(c.body, ks))
        disj = unfold_dim(ks, k)
        for j, d in enumerate(disj, 1):
            cid = c.id if len(disj) == 1 else f"{c.id}_d{j}"
            out.append(Clause(cid, head, c.constraint & d, body))
            prov[cid] = c.id
    if properties is not None:
        for c in properties.clauses:
            if c.id in prov:
                c = c.replace(id=f"prop_{c.id}")
            out.append(c)
            prov[c.id] = c.id
    return Program(tuple(out), instrumented=True), prov


def instrument(p: Program, properties: Optional[Program] = None) -> Program:
    return instrument_with_provenance(p, properties)[0]


def dim_var(atom: Atom) -> str:
    return atom.args[-1]


def erase_dimensions(p: Program) -> Program:
    """Drop the trailing argument of every atom and project it away.

    Applied to an instrumented program this recovers the original clauses,
    each disjunct copy collapsing back to its source clause.
    """
    from horndim.constraints import is_sat, project

    out = []
    for c in p.clauses:
        dims = {a.args[-1] for a in c.body if a.args}
        if c.head is not None and c.head.args:
            dims.add(c.head.args[-1])
        head = c.head
        if head is not None:
            head = None if head.pred == GOAL and head.arity == 1 else Atom(head.pred, head.args[:-1])
        body = tuple(Atom(a.pred, a.args[:-1]) for a in c.body)
        touched = [x for x in c.constraint if x.vars & dims]
        if all(x.vars <= dims for x in touched):
            # dimension constraints are separate: drop them verbatim
            rest = [x for x in c.constraint if not x.vars & dims]
            con = ConstraintConj(rest if is_sat(touched) else [*rest, *ConstraintConj.false()])
        else:
            con = project(c.constraint, c.vars - dims)
        out.append(Clause(c.id, head, con, body))
    return Program(tuple(out))
