"""Brute-force reference checks used by the tests.

Everything here works by enumerating points of a bounded grid or by exact
one-variable interval reasoning, so it shares no code with the solvers under
test.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

from horndim.constraints import EQ, LE, LT, ConstraintConj, LinConstraint

BOX = 3
RELS = ("=", "<=", "<", ">=", ">")


def random_constraint(rng: random.Random, variables: Sequence[str], max_coeff: int = 3,
                      max_const: int = 6) -> LinConstraint:
    width = rng.randint(1, min(2, len(variables)))
    picked = rng.sample(list(variables), width)
    coeffs = {v: rng.choice([c for c in range(-max_coeff, max_coeff + 1) if c]) for v in picked}
    rel = rng.choices(RELS, weights=(1, 3, 2, 3, 2))[0]
    return LinConstraint.make(coeffs, rng.randint(-max_const, max_const), rel)


def random_conj(rng: random.Random, variables: Sequence[str], n: Optional[int] = None,
                box: Optional[int] = BOX) -> ConstraintConj:
    n = rng.randint(1, 4) if n is None else n
    cons = [random_constraint(rng, variables) for _ in range(n)]
    if box is not None:
        cons += boxed(variables, box)
    return ConstraintConj(cons)


def boxed(variables: Iterable[str], b: int = BOX) -> list[LinConstraint]:
    out = []
    for v in variables:
        out.append(LinConstraint.make({v: 1}, -b, LE))
        out.append(LinConstraint.make({v: -1}, -b, LE))
    return out


def grid(variables: Sequence[str], b: int = BOX, step: Fraction = Fraction(1)):
    n = int(2 * b / step)
    # plain ints on the unit grid keep evaluation off the Fraction slow path
    axis = [-b + i * step for i in range(n + 1)] if step != 1 else list(range(-b, b + 1))
    for values in itertools.product(axis, repeat=len(variables)):
        yield dict(zip(variables, values))


def grid_models(c: Iterable[LinConstraint], variables: Sequence[str], b: int = BOX,
                step: Fraction = Fraction(1)) -> list[dict]:
    cons = list(c)
    return [pt for pt in grid(variables, b, step) if all(x.evaluate(pt) for x in cons)]


def interval_sat(c: Iterable[LinConstraint], var: str, point: Mapping[str, Fraction]) -> bool:
    """Exact rational satisfiability in ``var`` once every other variable is
    fixed by ``point``."""
    lo: Optional[tuple[Fraction, bool]] = None
    hi: Optional[tuple[Fraction, bool]] = None
    for x in c:
        a = x.coeff(var)
        rest = x.const + sum(k * point[v] for v, k in x.coeffs if v != var)
        if a == 0:
            if not {EQ: rest == 0, LE: rest <= 0, LT: rest < 0}[x.rel]:
                return False
            continue
        bound = -rest / a
        strict = x.rel == LT
        if x.rel == EQ or a > 0:
            if hi is None or bound < hi[0] or (bound == hi[0] and strict):
                hi = (bound, strict)
        if x.rel == EQ or a < 0:
            if lo is None or bound > lo[0] or (bound == lo[0] and strict):
                lo = (bound, strict)
    if lo is None or hi is None:
        return True
    if lo[0] < hi[0]:
        return True
    return lo[0] == hi[0] and not lo[1] and not hi[1]



# -- derivation correspondences ---------------------------------------------------

def feasible_trees(p, root, max_nodes: int) -> list:
    from horndim.derivations import enumerate_trees

    return list(enumerate_trees(p, root, max_nodes, feasible_only=True))


def root_dimension_forced(p, t, k: int) -> bool:
    """The root atom's last argument is forced to ``k`` by the tree's
    constraints."""
    from horndim.constraints import entails
    from horndim.derivations import constr, expand

    a = expand(p, t)
    dvar = a.atom.args[-1]
    return entails(constr(a), LinConstraint.make({dvar: 1}, -k, EQ))


def dimension_correspondence(p, max_nodes: int = 8) -> list[str]:
    """Mismatches between feasible trees of ``p`` (with their dimensions)
    and feasible trees of its instrumented form (with the dimension the
    root's argument is forced to), for every root predicate."""
    from horndim.chc import GOAL
    from horndim.instrument import instrument_with_provenance

    pd, prov = instrument_with_provenance(p)
    problems = []
    roots = sorted(q for q in p.predicates if q != GOAL) + [GOAL]
    for q in roots:
        if q == GOAL and not p.goal_clauses():
            continue
        plain = {str(t): t.dim for t in feasible_trees(p, q, max_nodes)}
        lifted: dict[str, set] = {}
        for t in feasible_trees(pd, q, max_nodes):
            src = t.map_ids(prov.__getitem__)
            lifted.setdefault(str(src), set()).update(
                k for k in range(t.size) if root_dimension_forced(pd, t, k))
        for s, k in plain.items():
            if k not in lifted.get(s, ()):
                problems.append(f"{q}: {s} has dimension {k} but no instrumented image forces it")
        for s, ks in lifted.items():
            if s not in plain:
                problems.append(f"{q}: instrumented image of {s} is feasible, the tree is not")
            elif ks != {plain[s]}:
                problems.append(f"{q}: {s} images force dimensions {sorted(ks)}")
    return problems


def partition_mismatches(p, k: int, max_nodes: int = 8) -> list[str]:
    """Compare feasible trees of ``p`` split at dimension ``k`` with the
    feasible trees of the at-most-``k`` and at-least-``k+1`` programs, mapped
    back through provenance.  Every predicate is used as a root, the goal
    included, each through its top version.

    Trees are compared as sets: with three or more body atoms a tie can
    satisfy several cases of the dimension split, giving one source tree
    several images that all agree on its dimension.
    """
    from horndim.chc import GOAL
    from horndim.specialize import atleast, atmost

    problems = []
    low, high = atmost(p, k), atleast(p, k + 1)
    roots = sorted(q for q in p.predicates if q != GOAL)
    if p.goal_clauses():
        roots.append(GOAL)
    for q in roots:
        trees = feasible_trees(p, q, max_nodes)
        low_src = {str(t) for t in trees if t.dim <= k}
        high_src = {str(t) for t in trees if t.dim > k}
        for label, spec, root, want in (("<=", low, f"{q}__le{k}", low_src),
                                        (">", high, f"{q}__ge{k + 1}", high_src)):
            if root not in spec.program.predicates:
                got = set()
            else:
                got = {str(t.map_ids(spec.provenance.__getitem__))
                       for t in feasible_trees(spec.program, root, max_nodes)}
            if got != want:
                problems.append(f"{q} dim {label} {k}: missing {sorted(want - got)},"
                                f" extra {sorted(got - want)}")
        both = low_src & high_src
        if both:
            problems.append(f"{q}: trees on both sides: {sorted(both)}")
    return problems

