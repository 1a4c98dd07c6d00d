"""Exact simplex feasibility check (general simplex with delta-rationals).

Strict bounds ``x < c`` are encoded as ``x <= c - delta`` for a symbolic
infinitesimal ``delta``; values are pairs ``(a, b)`` meaning ``a + b*delta``
and compare lexicographically, which is exactly the ordering of such
values for all sufficiently small ``delta > 0``.

Equalities are first eliminated by Gaussian substitution; single-variable
inequalities become bounds, the rest get a slack row.  Bland's rule
guarantees termination.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Optional

from horndim.constraints.linear import EQ, LT, LinConstraint

ZERO = Fraction(0)
DR = tuple  # (Fraction, Fraction)


class BudgetExhausted(RuntimeError):
    """Integer branch-and-bound ran out of nodes."""


def _dr_add(x: DR, y: DR) -> DR:
    return (x[0] + y[0], x[1] + y[1])


def _dr_sub(x: DR, y: DR) -> DR:
    return (x[0] - y[0], x[1] - y[1])


def _dr_mul(x: DR, k: Fraction) -> DR:
    return (x[0] * k, x[1] * k)


class _Tableau:
    def __init__(self):
        self.order: dict[str, int] = {}
        self.lower: dict[str, DR] = {}
        self.upper: dict[str, DR] = {}
        self.value: dict[str, DR] = {}
        self.rows: dict[str, dict[str, Fraction]] = {}  # basic -> {nonbasic: coeff}

    def add_var(self, v: str) -> None:
        if v not in self.order:
            self.order[v] = len(self.order)
            self.value[v] = (ZERO, ZERO)

    def bound(self, v: str, lo: Optional[DR], hi: Optional[DR]) -> bool:
        if lo is not None and (v not in self.lower or lo > self.lower[v]):
            self.lower[v] = lo
        if hi is not None and (v not in self.upper or hi < self.upper[v]):
            self.upper[v] = hi
        if v in self.lower and v in self.upper and self.lower[v] > self.upper[v]:
            return False
        return True

    def _update(self, xj: str, v: DR) -> None:
        delta = _dr_sub(v, self.value[xj])
        for xb, row in self.rows.items():
            a = row.get(xj)
            if a:
                self.value[xb] = _dr_add(self.value[xb], _dr_mul(delta, a))
        self.value[xj] = v

    def _pivot(self, xi: str, xj: str) -> None:
        row = self.rows.pop(xi)
        a = row.pop(xj)
        inv = 1 / a
        new = {k: -c * inv for k, c in row.items()}
        new[xi] = inv
        for xb, r in self.rows.items():
            c = r.pop(xj, None)
            if c:
                for k, d in new.items():
                    val = r.get(k, ZERO) + c * d
                    if val:
                        r[k] = val
                    else:
                        r.pop(k, None)
        self.rows[xj] = new

    def check(self) -> bool:
        order = self.order
        while True:
            bad = None
            for xb in sorted(self.rows, key=order.__getitem__):
                val = self.value[xb]
                lo = self.lower.get(xb)
                hi = self.upper.get(xb)
                if lo is not None and val < lo:
                    bad = (xb, lo, True)
                    break
                if hi is not None and val > hi:
                    bad = (xb, hi, False)
                    break
            if bad is None:
                return True
            xi, target, raise_it = bad
            row = self.rows[xi]
            pick = None
            for xj in sorted(row, key=order.__getitem__):
                a = row[xj]
                up = (a > 0) == raise_it
                if up:
                    hi = self.upper.get(xj)
                    if hi is None or self.value[xj] < hi:
                        pick = xj
                        break
                else:
                    lo = self.lower.get(xj)
                    if lo is None or self.value[xj] > lo:
                        pick = xj
                        break
            if pick is None:
                return False
            a = row[pick]
            theta = _dr_mul(_dr_sub(target, self.value[xi]), 1 / a)
            self._update(pick, _dr_add(self.value[pick], theta))
            self._pivot(xi, pick)

    def delta_value(self) -> Fraction:
        """A concrete positive delta at which all bounds still hold."""
        d = Fraction(1)
        for v, val in self.value.items():
            for lo, hi in ((self.lower.get(v), val), (val, self.upper.get(v))):
                if lo is None or hi is None:
                    continue
                if lo[0] < hi[0] and lo[1] > hi[1]:
                    d = min(d, (hi[0] - lo[0]) / (lo[1] - hi[1]))
        return d / 2 if d < 1 else d


def _gauss(cons: list[LinConstraint]):
    """Split off equalities by substitution.

    Returns ``(subst, rest)`` where ``subst`` maps an eliminated variable to
    ``(coeffs, const)`` over the remaining variables, or ``None`` when an
    equality is contradictory.
    """
    subst: dict[str, tuple[dict[str, Fraction], Fraction]] = {}
    rest = []
    eqs = [c for c in cons if c.rel == EQ]
    ineqs = [c for c in cons if c.rel != EQ]
    for e in eqs:
        for v, (ex, k) in subst.items():
            e = e.substitute(v, ex, k)
        if not e.coeffs:
            if e.const != 0:
                return None
            continue
        # pivot on the variable with the largest |coeff| is irrelevant over Q;
        # choose the last one for determinism
        v, a = e.coeffs[-1]
        ex = {w: -c / a for w, c in e.coeffs if w != v}
        k = -e.const / a
        for w in list(subst):
            sx, sk = subst[w]
            if v in sx:
                b = sx[v]
                nx = {u: c for u, c in sx.items() if u != v}
                for u, c in ex.items():
                    nx[u] = nx.get(u, ZERO) + b * c
                    if nx[u] == 0:
                        del nx[u]
                subst[w] = (nx, sk + b * k)
        subst[v] = (ex, k)
    for c in ineqs:
        for v, (ex, k) in subst.items():
            c = c.substitute(v, ex, k)
        rest.append(c)
    return subst, rest


def solve(constraints: Iterable[LinConstraint], want_model: bool = False):
    """Rational feasibility.  Returns ``None`` if unsatisfiable, otherwise
    ``True`` or, with ``want_model``, a satisfying assignment for every
    variable occurring in ``constraints``."""
    cons = list(constraints)
    allvars = sorted({v for c in cons for v, _ in c.coeffs})
    g = _gauss(cons)
    if g is None:
        return None
    subst, rest = g
    t = _Tableau()
    slack_of: dict[tuple, str] = {}
    pending = []
    for c in rest:
        if not c.coeffs:
            if not c.evaluate({}):
                return None
            continue
        strict = c.rel == LT
        if len(c.coeffs) == 1:
            (v, a), = c.coeffs
            t.add_var(v)
            b = -c.const / a
            if a > 0:
                ok = t.bound(v, None, (b, Fraction(-1) if strict else ZERO))
            else:
                ok = t.bound(v, (b, Fraction(1) if strict else ZERO), None)
            if not ok:
                return None
            continue
        # rows sharing a direction share one slack variable
        lead = c.coeffs[0][1]
        key = tuple((v, a / lead) for v, a in c.coeffs)
        b = -c.const / lead
        eps = Fraction(1) if strict else ZERO
        s = slack_of.get(key)
        if s is None:
            s = f"$s{len(slack_of)}"
            slack_of[key] = s
            for v, _ in key:
                t.add_var(v)
        pending.append((s, key, (None, (b, -eps)) if lead > 0 else ((b, eps), None)))
    # slacks come after originals in Bland's ordering
    for s, key, (lo, hi) in pending:
        if s not in t.rows:
            t.add_var(s)
            t.rows[s] = dict(key)
        if not t.bound(s, lo, hi):
            return None
    # nonbasic originals start inside their bounds
    for v in list(t.order):
        if v in t.rows:
            continue
        if v in t.lower:
            t.value[v] = t.lower[v]
        elif v in t.upper:
            t.value[v] = t.upper[v]
    for s, row in t.rows.items():
        val = (ZERO, ZERO)
        for v, a in row.items():
            val = _dr_add(val, _dr_mul(t.value[v], a))
        t.value[s] = val
    if not t.check():
        return None
    if not want_model:
        return True
    d = t.delta_value()
    model = {v: val[0] + val[1] * d for v, val in t.value.items() if not v.startswith("$")}
    for v in allvars:
        model.setdefault(v, ZERO)
    # substitution entries only mention surviving variables
    for v in subst:
        ex, k = subst[v]
        model[v] = k + sum(c * model.get(u, ZERO) for u, c in ex.items())
    return {v: model[v] for v in allvars}


def is_sat_rational(constraints: Iterable[LinConstraint]) -> bool:
    return solve(constraints) is not None


def is_sat_integer(constraints: Iterable[LinConstraint], budget: int = 10_000) -> bool:
    """Branch and bound over the integer-tightened system."""
    base = [c.integer_tightened() for c in constraints]
    stack: list[list[LinConstraint]] = [[]]
    nodes = 0
    while stack:
        extra = stack.pop()
        nodes += 1
        if nodes > budget:
            raise BudgetExhausted(f"integer check exceeded {budget} nodes")
        model = solve(base + extra, want_model=True)
        if model is None:
            continue
        frac = next((v for v in sorted(model) if model[v].denominator != 1), None)
        if frac is None:
            return True
        val = model[frac]
        lo = LinConstraint.make({frac: 1}, -math.floor(val), "<=")
        hi = LinConstraint.make({frac: 1}, -math.ceil(val), ">=")
        stack.append(extra + [hi])
        stack.append(extra + [lo])
    return False
