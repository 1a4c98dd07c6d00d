"""Decision procedures over conjunctions: satisfiability, entailment,
Fourier-Motzkin projection, convex hull and widening."""

from __future__ import annotations

from fractions import Fraction
from itertools import count
from typing import Iterable

from horndim.constraints.linear import (
    EQ, FALSE, LE, LT, TRUE, ConstraintConj, LinConstraint,
)
from horndim.constraints.simplex import is_sat_integer, is_sat_rational

RATIONAL = "rational"
INTEGER = "integer"

DEFAULT_INT_BUDGET = 10_000


def is_sat(c: ConstraintConj | Iterable[LinConstraint], mode: str = RATIONAL,
           budget: int = DEFAULT_INT_BUDGET) -> bool:
    items = list(c)
    if mode == RATIONAL:
        return is_sat_rational(items)
    if mode == INTEGER:
        return is_sat_rational(items) and is_sat_integer(items, budget)
    raise ValueError(f"unknown mode {mode!r}")


def entails(c: ConstraintConj | Iterable[LinConstraint], f: LinConstraint) -> bool:
    """``c |= f`` over the rationals."""
    items = list(c)
    if f in items or f == TRUE:
        return True
    return all(not is_sat_rational(items + [n]) for n in f.negations())


def entails_all(c: ConstraintConj, d: Iterable[LinConstraint]) -> bool:
    return all(entails(c, f) for f in d)


def equivalent(a: ConstraintConj, b: ConstraintConj) -> bool:
    return entails_all(a, b) and entails_all(b, a)


# -- projection ------------------------------------------------------------

def _dominance_prune(cons: list[LinConstraint]) -> list[LinConstraint]:
    """Among inequalities with the same direction keep only the tightest."""
    best: dict[tuple, LinConstraint] = {}
    out: list[LinConstraint] = []
    for c in cons:
        if c == TRUE:
            continue
        if c == FALSE:
            return [FALSE]
        if c.rel == EQ:
            out.append(c)
            continue
        # normalise direction so leading coeff is 1 (positive scaling only)
        lead = abs(c.coeffs[0][1])
        key = tuple((v, a / lead) for v, a in c.coeffs)
        bound = -c.const / lead  # expr <= bound (or <)
        prev = best.get(key)
        if prev is None:
            best[key] = c
            continue
        pb = -prev.const / abs(prev.coeffs[0][1])
        if bound < pb or (bound == pb and c.rel == LT):
            best[key] = c
    return sorted(set(out) | set(best.values()))


def _merge_equalities(cons: list[LinConstraint]) -> list[LinConstraint]:
    """Turn ``e <= 0`` together with ``-e <= 0`` into ``e = 0``."""
    s = set(cons)
    out = set()
    used = set()
    for c in cons:
        if c.rel != LE or c in used:
            continue
        partner = LinConstraint.make(
            {v: -a for v, a in c.coeffs}, -c.const, LE)
        if partner in s and partner not in used:
            used.update((c, partner))
            out.add(LinConstraint.make(dict(c.coeffs), c.const, EQ))
    return sorted((s - used) | out)


def remove_redundant(cons: Iterable[LinConstraint]) -> list[LinConstraint]:
    cur = _merge_equalities(_dominance_prune(list(cons)))
    if cur == [FALSE]:
        return cur
    i = 0
    while i < len(cur):
        others = cur[:i] + cur[i + 1:]
        if entails(others, cur[i]):
            cur = others
        else:
            i += 1
    return cur


def _substitute_equalities(cons: list[LinConstraint], elim: set[str]) -> list[LinConstraint]:
    """Gaussian elimination of ``elim`` variables defined by equalities."""
    changed = True
    while changed:
        changed = False
        for e in cons:
            if e.rel != EQ:
                continue
            cand = [(v, a) for v, a in e.coeffs if v in elim]
            if not cand:
                continue
            v, a = cand[0]
            ex = {w: -b / a for w, b in e.coeffs if w != v}
            k = -e.const / a
            cons = [x.substitute(v, ex, k) for x in cons if x is not e]
            changed = True
            break
    return cons


def project(c: ConstraintConj | Iterable[LinConstraint], keep: Iterable[str],
            simplify: bool = True) -> ConstraintConj:
    """Existentially quantify every variable outside ``keep``."""
    keep = set(keep)
    cons = list(c)
    if not is_sat_rational(cons):
        return ConstraintConj.false()
    elim = set({v for x in cons for v in x.vars} - keep)
    cons = _dominance_prune(_substitute_equalities(cons, elim))
    while True:
        live = sorted({v for x in cons for v in x.vars} & elim)
        if not live:
            break
        # redundancy removal may merge inequality pairs back into equalities
        if any(x.rel == EQ and x.vars & elim for x in cons):
            cons = _dominance_prune(_substitute_equalities(cons, elim))
            continue

        def cost(v):
            pos = sum(1 for x in cons if x.coeff(v) > 0)
            neg = sum(1 for x in cons if x.coeff(v) < 0)
            return (pos * neg, v)

        v = min(live, key=cost)
        pos = [x for x in cons if x.coeff(v) > 0]
        neg = [x for x in cons if x.coeff(v) < 0]
        new = [x for x in cons if x.coeff(v) == 0]
        for p in pos:
            for n in neg:
                a, b = p.coeff(v), -n.coeff(v)
                cs: dict[str, Fraction] = {}
                for w, k in p.coeffs:
                    cs[w] = cs.get(w, Fraction(0)) + b * k
                for w, k in n.coeffs:
                    cs[w] = cs.get(w, Fraction(0)) + a * k
                cs.pop(v, None)
                rel = LT if LT in (p.rel, n.rel) else LE
                new.append(LinConstraint.make(cs, b * p.const + a * n.const, rel))
        cons = _dominance_prune(new)
        if cons == [FALSE]:
            return ConstraintConj.false()
        if len(cons) > 12:
            cons = remove_redundant(cons)
    if simplify:
        cons = remove_redundant(cons)
    else:
        cons = _merge_equalities(_dominance_prune(cons))
    return ConstraintConj(cons)


# -- polyhedra -------------------------------------------------------------

_fresh = count()


def hull(a: ConstraintConj, b: ConstraintConj, variables: Iterable[str] | None = None
         ) -> ConstraintConj:
    """Closed convex hull of two polyhedra over ``variables``."""
    if not is_sat_rational(list(a)):
        return minimize(b.closure()) if is_sat_rational(list(b)) else ConstraintConj.false()
    if not is_sat_rational(list(b)):
        return minimize(a.closure())
    vs = sorted(set(variables) if variables is not None else (a.vars | b.vars))
    tag = next(_fresh)
    lam = f"$lam{tag}"
    ya = {v: f"$ya{tag}_{v}" for v in vs}
    yb = {v: f"$yb{tag}_{v}" for v in vs}
    cons: list[LinConstraint] = []
    for v in vs:
        cons.append(LinConstraint.make({v: 1, ya[v]: -1, yb[v]: -1}, 0, EQ))
    for c in a.closure():
        cs = {ya.get(w, w): k for w, k in c.coeffs}
        cs[lam] = cs.get(lam, 0) + c.const
        cons.append(LinConstraint.make(cs, 0, c.rel))
    for c in b.closure():
        cs = {yb.get(w, w): k for w, k in c.coeffs}
        cs[lam] = cs.get(lam, 0) - c.const
        cons.append(LinConstraint.make(cs, c.const, c.rel))
    cons.append(LinConstraint.make({lam: -1}, 0, LE))
    cons.append(LinConstraint.make({lam: 1}, -1, LE))
    return project(cons, vs)


def widen(a: ConstraintConj, b: ConstraintConj) -> ConstraintConj:
    """Keep exactly the constraints of ``a`` that ``b`` entails."""
    if not is_sat_rational(list(a)):
        return b
    return ConstraintConj(
        _merge_equalities([c for c in a.split_equalities() if entails(b, c)]))


def minimize(c: ConstraintConj) -> ConstraintConj:
    if not is_sat_rational(list(c)):
        return ConstraintConj.false()
    return ConstraintConj(remove_redundant(c))


def is_empty(c: ConstraintConj) -> bool:
    return not is_sat_rational(list(c))
