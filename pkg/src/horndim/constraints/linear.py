"""Linear constraints over rational-valued variables.

A :class:`LinConstraint` stands for ``sum(c_i * x_i) + const REL 0`` with
``REL`` one of ``=``, ``<=`` or ``<``.  Instances are always stored in a
canonical form so that syntactically different spellings of the same
half-space compare equal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

EQ = "="
LE = "<="
LT = "<"

_FLIP = {">=": LE, ">": LT}


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


@dataclass(frozen=True, order=True)
class LinConstraint:
    coeffs: tuple[tuple[str, Fraction], ...]
    const: Fraction
    rel: str

    @staticmethod
    def make(coeffs: Mapping[str, Fraction | int], const: Fraction | int = 0,
             rel: str = LE) -> "LinConstraint":
        """Build a canonical constraint ``coeffs . x + const rel 0``.

        ``>=`` and ``>`` are accepted and rewritten by negation.
        """
        cs = {v: Fraction(c) for v, c in coeffs.items() if c != 0}
        const = Fraction(const)
        if rel in _FLIP:
            cs = {v: -c for v, c in cs.items()}
            const = -const
            rel = _FLIP[rel]
        if rel not in (EQ, LE, LT):
            raise ValueError(f"unknown relation {rel!r}")
        if not cs:
            holds = {EQ: const == 0, LE: const <= 0, LT: const < 0}[rel]
            return TRUE if holds else FALSE
        # scale to coprime integers (positive factor; equalities also fix sign)
        den = 1
        for c in list(cs.values()) + [const]:
            den = _lcm(den, c.denominator)
        nums = [int(c * den) for c in cs.values()]
        g = 0
        for n in nums + [int(const * den)]:
            g = math.gcd(g, n)
        scale = Fraction(den, g)
        items = sorted((v, c * scale) for v, c in cs.items())
        const = const * scale
        if rel == EQ and items[0][1] < 0:
            items = [(v, -c) for v, c in items]
            const = -const
        return LinConstraint(tuple(items), const, rel)

    # -- queries -------------------------------------------------------

    @property
    def vars(self) -> frozenset[str]:
        return frozenset(v for v, _ in self.coeffs)

    def coeff(self, var: str) -> Fraction:
        for v, c in self.coeffs:
            if v == var:
                return c
        return Fraction(0)

    @property
    def is_trivial(self) -> bool:
        return not self.coeffs

    def evaluate(self, point: Mapping[str, Fraction | int]) -> bool:
        total = self.const + sum(c * point[v] for v, c in self.coeffs)
        return {EQ: total == 0, LE: total <= 0, LT: total < 0}[self.rel]

    # -- transformations -----------------------------------------------

    def rename(self, mapping: Mapping[str, str]) -> "LinConstraint":
        cs: dict[str, Fraction] = {}
        for v, c in self.coeffs:
            w = mapping.get(v, v)
            cs[w] = cs.get(w, Fraction(0)) + c
        return LinConstraint.make(cs, self.const, self.rel)

    def substitute(self, var: str, expr: Mapping[str, Fraction],
                   expr_const: Fraction) -> "LinConstraint":
        """Replace ``var`` by ``expr . x + expr_const``."""
        a = self.coeff(var)
        if a == 0:
            return self
        cs = {v: c for v, c in self.coeffs if v != var}
        for v, c in expr.items():
            cs[v] = cs.get(v, Fraction(0)) + a * c
        return LinConstraint.make(cs, self.const + a * expr_const, self.rel)

    def negations(self) -> list["LinConstraint"]:
        """Constraints whose disjunction is the complement of ``self``."""
        neg = {v: -c for v, c in self.coeffs}
        if self.rel == LE:
            return [LinConstraint.make(neg, -self.const, LT)]
        if self.rel == LT:
            return [LinConstraint.make(neg, -self.const, LE)]
        return [LinConstraint.make(dict(self.coeffs), self.const, LT),
                LinConstraint.make(neg, -self.const, LT)]

    def closure(self) -> "LinConstraint":
        if self.rel != LT:
            return self
        return LinConstraint.make(dict(self.coeffs), self.const, LE)

    def split(self) -> list["LinConstraint"]:
        """Equalities become a pair of non-strict inequalities."""
        if self.rel != EQ:
            return [self]
        neg = {v: -c for v, c in self.coeffs}
        return [LinConstraint.make(dict(self.coeffs), self.const, LE),
                LinConstraint.make(neg, -self.const, LE)]

    def integer_tightened(self) -> "LinConstraint":
        """Strongest constraint with the same integer solutions.

        Assumes every variable ranges over the integers.
        """
        if not self.coeffs:
            return self
        g = 0
        for _, c in self.coeffs:
            g = math.gcd(g, int(c))
        cs = {v: c / g for v, c in self.coeffs}
        bound = -self.const / g  # expr rel bound
        if self.rel == EQ:
            if bound.denominator != 1:
                return FALSE
            return LinConstraint.make(cs, -bound, EQ)
        if self.rel == LT:
            # integer expr < bound  <=>  expr <= ceil(bound) - 1
            b = math.ceil(bound) - 1
        else:
            b = math.floor(bound)
        return LinConstraint.make(cs, -b, LE)

    # -- display -------------------------------------------------------

    def __str__(self) -> str:
        return format_constraint(self)


TRUE = LinConstraint((), Fraction(0), LE)
FALSE = LinConstraint((), Fraction(1), LE)


def _fmt_num(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def format_linexpr(items: Iterable[tuple[str, Fraction]], name=lambda v: v) -> str:
    out = []
    for v, c in items:
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        term = name(v) if mag == 1 else f"{_fmt_num(mag)}*{name(v)}"
        if not out:
            out.append(term if sign == "+" else "-" + term)
        else:
            out.append(sign + term)
    return "".join(out) if out else "0"


def format_constraint(c: LinConstraint, name=lambda v: v) -> str:
    """Prolog-style rendering, e.g. ``A-B=0`` or ``A>=1``."""
    if c == TRUE:
        return "true"
    if c == FALSE:
        return "1=0"
    items = list(c.coeffs)
    rhs = -c.const
    pos = [(v, k) for v, k in items if k > 0]
    neg = [(v, -k) for v, k in items if k < 0]
    if pos and neg:
        # A-B+1=<0 reads better as A+1=<B
        op = {EQ: "=", LE: "=<", LT: "<"}[c.rel]
        right = format_linexpr(neg, name)
        if rhs > 0:
            right += f"+{_fmt_num(rhs)}"
        elif rhs < 0:
            right += f"-{_fmt_num(-rhs)}"
        return f"{format_linexpr(pos, name)}{op}{right}"
    if c.rel == EQ:
        op = "="
    else:
        # prefer a positive leading coefficient, as in ``A>=1`` rather than ``-A=<-1``
        if all(k < 0 for _, k in items):
            items = [(v, -k) for v, k in items]
            rhs = -rhs
            op = ">=" if c.rel == LE else ">"
        else:
            op = "=<" if c.rel == LE else "<"
    return f"{format_linexpr(items, name)}{op}{_fmt_num(rhs) if rhs >= 0 else '-' + _fmt_num(-rhs)}"


class ConstraintConj:
    """Duplicate-free conjunction of canonical linear constraints."""

    __slots__ = ("items", "_hash")

    def __init__(self, items: Iterable[LinConstraint] = ()):
        s = set()
        for c in items:
            if c == TRUE:
                continue
            s.add(c)
        if FALSE in s:
            s = {FALSE}
        self.items: tuple[LinConstraint, ...] = tuple(sorted(s))
        self._hash = hash(self.items)

    @classmethod
    def false(cls) -> "ConstraintConj":
        return cls([FALSE])

    def __iter__(self):
        return iter(self.items)

    def __len__(self) -> int:
        return len(self.items)

    def __bool__(self) -> bool:
        return bool(self.items)

    def __eq__(self, other) -> bool:
        return isinstance(other, ConstraintConj) and self.items == other.items

    def __hash__(self) -> int:
        return self._hash

    def __and__(self, other: "ConstraintConj | Iterable[LinConstraint]") -> "ConstraintConj":
        return ConstraintConj(self.items + tuple(other))

    def __repr__(self) -> str:
        return f"ConstraintConj({self})"

    def __str__(self) -> str:
        return ", ".join(map(str, self.items)) if self.items else "true"

    @property
    def is_trivially_false(self) -> bool:
        return self.items == (FALSE,)

    @property
    def vars(self) -> frozenset[str]:
        out: set[str] = set()
        for c in self.items:
            out.update(v for v, _ in c.coeffs)
        return frozenset(out)

    def rename(self, mapping: Mapping[str, str]) -> "ConstraintConj":
        return ConstraintConj(c.rename(mapping) for c in self.items)

    def evaluate(self, point: Mapping[str, Fraction | int]) -> bool:
        return all(c.evaluate(point) for c in self.items)

    def closure(self) -> "ConstraintConj":
        return ConstraintConj(c.closure() for c in self.items)

    def split_equalities(self) -> "ConstraintConj":
        return ConstraintConj(x for c in self.items for x in c.split())

    def integer_tightened(self) -> "ConstraintConj":
        return ConstraintConj(c.integer_tightened() for c in self.items)


def lin(text: str) -> LinConstraint:
    """Parse one constraint in the concrete syntax, e.g. ``lin("K1>=K2+1")``."""
    from horndim.syntax import parse_constraint

    return parse_constraint(text)


def conj(*texts: str) -> ConstraintConj:
    """Shorthand used mostly in tests: ``conj("X>0", "Y=X+1")``."""
    return ConstraintConj(lin(t) for t in texts)
