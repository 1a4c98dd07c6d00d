"""Reference specialized programs and a structural comparison up to variable
renaming and constraint equivalence."""

from __future__ import annotations

import itertools
from collections import Counter

from horndim.chc import Clause, Program
from horndim.constraints import EQ, LinConstraint, equivalent, project
from horndim.syntax import parse_program

FIB_AT_MOST_1 = """
false__eq1(A) :- C>5, C-D>0, A=1, fib__eq1(C,D,A).
false__le1(A) :- A>=0, C>5, C-D>0, -A>= -1, fib__le1(C,D,A).
fib__eq1(A,B,C) :- A>1, C=1, A-E=2, A-F=1, B-G-H=0, I=0, fib__eq1(E,H,C), fib__eq0(F,G,I).
fib__eq1(A,B,C) :- A>1, C=1, A-E=2, A-F=1, B-G-H=0, I=0, fib__eq0(E,H,I), fib__eq1(F,G,C).
fib__eq1(A,B,C) :- A>1, C=1, A-E=2, A-F=1, B-G-H=0, I=0, fib__eq0(E,H,I), fib__eq0(F,G,I).
fib__eq0(A,B,C) :- A>=0, -A>= -1, A-B=0, C=0.
fib__le1(A,B,C) :- A>=0, -A>= -1, A-B=0, C=0.
fib__le1(A,B,C) :- A>1, C=1, A-E=2, A-F=1, B-G-H=0, I=0, fib__eq1(E,H,C), fib__eq0(F,G,I).
fib__le1(A,B,C) :- A>1, C=1, A-E=2, A-F=1, B-G-H=0, I=0, fib__eq0(E,H,I), fib__eq1(F,G,C).
fib__le1(A,B,C) :- A>1, C=1, A-E=2, A-F=1, B-G-H=0, I=0, fib__eq0(E,H,I), fib__eq0(F,G,I).
"""

# the first recursive clause is listed with two stray extra arguments; they
# are dropped here so the listing is arity-consistent
FIB_AT_LEAST_1 = """
false__ge1(A) :- A>=1, C>5, C-D>0, fib__ge1(C,D,A).
fib__ge1(A,B,C) :- A>1, C-I>=1, I>=0, A-E=2, A-F=1, B-G-H=0, fib__ge1(E,H,C), fib__any(F,G,I).
fib__ge1(A,B,C) :- A>1, C-I>=1, I>=0, A-E=2, A-F=1, B-G-H=0, fib__any(E,H,I), fib__ge1(F,G,C).
fib__ge1(A,B,C) :- A>1, C>=1, A-E=2, A-F=1, B-G-H=0, C-I=1, fib__any(E,H,I), fib__any(F,G,I).
fib__any(A,B,C) :- A>=0, -A>= -1, A-B=0, C=0.
fib__any(A,B,C) :- A>1, C-I>=1, I>=0, A-E=2, A-F=1, B-G-H=0, fib__ge1(E,H,C), fib__any(F,G,I).
fib__any(A,B,C) :- A>1, C-I>=1, I>=0, A-E=2, A-F=1, B-G-H=0, fib__any(E,H,I), fib__ge1(F,G,C).
fib__any(A,B,C) :- A>1, C>=1, A-E=2, A-F=1, B-G-H=0, C-I=1, fib__any(E,H,I), fib__any(F,G,I).
"""

# no dimension arguments; compared against the dimension-stripped output.  The
# goal versions occur in bodies here, which programs reject for goal
# predicates, so they are spelled fail__* on both sides of the comparison
REVLEN_AT_MOST_1 = """
applen__eq0(A,B,C) :- A=0, B=C, B>=0.
applen__eq1(A,B,C) :- A=D+1, C=E+1, applen__eq1(D,B,E).
applen__eq0(A,B,C) :- A=D+1, C=E+1, applen__eq0(D,B,E).
applen__le1(A,B,C) :- applen__eq1(A,B,C).
applen__le1(A,B,C) :- applen__eq0(A,B,C).
applen__le0(A,B,C) :- applen__eq0(A,B,C).
revlen__eq0(A,B) :- A=0, B=0.
revlen__eq1(A,B) :- A=C+1, E=1, applen__le0(D,E,B), revlen__eq1(C,D).
revlen__eq1(A,B) :- A=C+1, E=1, revlen__le0(C,D), applen__eq1(D,E,B).
revlen__eq1(A,B) :- A=C+1, E=1, revlen__eq0(C,D), applen__eq0(D,E,B).
revlen__le1(A,B) :- revlen__eq1(A,B).
revlen__le1(A,B) :- revlen__eq0(A,B).
revlen__le0(A,B) :- revlen__eq0(A,B).
fail__eq1 :- A=\\=B, revlen__eq1(A,B).
fail__eq0 :- A=\\=B, revlen__eq0(A,B).
fail__le1 :- fail__eq1.
fail__le1 :- fail__eq0.
fail__le0 :- fail__eq0.
"""


def reference(text: str) -> Program:
    return parse_program(text)


def _linked(c: Clause) -> list[str]:
    out = list(c.head.args) if c.head is not None else []
    for a in c.body:
        out.extend(a.args)
    return out


def clauses_match(a: Clause, b: Clause) -> bool:
    """Same head predicate, same body predicates in some order, and
    equivalent constraints once the argument variables are identified."""
    if a.head_pred != b.head_pred or Counter(x.pred for x in a.body) != Counter(
            x.pred for x in b.body):
        return False
    b = b.rename({v: f"R_{v}" for v in b.vars})
    keep = _linked(a)
    for order in itertools.permutations(b.body):
        if [x.pred for x in order] != [x.pred for x in a.body]:
            continue
        other = b.replace(body=tuple(order))
        # argument positions are identified by equalities, which also copes
        # with a variable shared between the head and a body atom
        links = [LinConstraint.make({x: 1, y: -1}, 0, EQ) for x, y in zip(_linked(other), keep)]
        renamed = other.constraint & links
        if equivalent(project(a.constraint, keep), project(renamed, keep)):
            return True
    return False


def compare(ours: Program, ref: Program) -> list[str]:
    """Differences between two specialized programs; empty when they agree."""
    problems = []
    mine = Counter(c.head_pred for c in ours.clauses)
    theirs = Counter(c.head_pred for c in ref.clauses)
    if set(mine) != set(theirs):
        problems.append(f"versions differ: only ours {sorted(set(mine) - set(theirs))}, "
                        f"only reference {sorted(set(theirs) - set(mine))}")
    for v in sorted(set(mine) & set(theirs)):
        if mine[v] != theirs[v]:
            problems.append(f"{v}: {mine[v]} clauses, reference has {theirs[v]}")
    unmatched = list(ref.clauses)
    for c in ours.clauses:
        hit = next((r for r in unmatched if clauses_match(c, r)), None)
        if hit is None:
            problems.append(f"no reference clause equivalent to {c}")
        else:
            unmatched.remove(hit)
    problems.extend(f"reference clause {r} has no counterpart" for r in unmatched)
    return problems


def rename_goals(p: Program) -> Program:
    return p.with_clauses(
        c.replace(head=c.head.with_pred(c.head.pred.replace("false__", "fail__", 1)))
        if c.head is not None and c.head.pred.startswith("false__") else c
        for c in p.clauses)


# p :- p, p with properties [K=<1, K=<0] seeded by K=<1; p__v0 is the K=<1
# version and p__v0_1 the K=<1, K=<0 one
BINARY_P_PE = """
p__v0(B) :- B=0.
p__v0(B) :- B>=F+1, B=<1, B=D, p__v0(D), p__v0_1(F).
p__v0(B) :- B>=D+1, B=<1, B=F, p__v0_1(D), p__v0(F).
p__v0(B) :- B=<1, B=D+1, B=F+1, p__v0_1(D), p__v0_1(F).
p__v0_1(B) :- B=0.
p__v0_1(B) :- B>=F+1, B=<0, B=D, p__v0_1(D), p__v0_1(F).
p__v0_1(B) :- B>=D+1, B=<0, B=F, p__v0_1(D), p__v0_1(F).
p__v0_1(B) :- B=<0, B=D+1, B=F+1, p__v0_1(D), p__v0_1(F).
"""
