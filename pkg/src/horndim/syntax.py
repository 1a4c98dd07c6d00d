"""Prolog-style concrete syntax for CHC programs.

    c1. fib(A,B) :- A>=0, A=<1, B=A.
    c3. false :- A>5, fib(A,B), B<A.      % comment

Atom arguments may be arbitrary linear expressions; they are normalised
into fresh variables plus equalities (see :mod:`horndim.chc`).  A ``=\\=``
constraint splits its clause in two, one copy per strict direction.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Optional

from horndim.chc import Atom, Clause, ConstrainedFact, Interpretation, Program
from horndim.constraints import ConstraintConj, LinConstraint
from horndim.constraints.linear import EQ, LE, LT, format_constraint


class ParseError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {msg}" if line else msg)
        self.line = line
        self.col = col


class NonlinearError(ParseError):
    pass


_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>%[^\n]*)
  | (?P<neck>:-)
  | (?P<rel>=\\=|\\=|!=|≠|=<|<=|>=|≤|≥|=|<|>)
  | (?P<int>\d+)
  | (?P<var>[A-Z_][A-Za-z0-9_]*)
  | (?P<ident>[a-z][A-Za-z0-9_]*)
  | (?P<punct>[(),.+\-*])
""", re.VERBOSE)

_REL = {"=": EQ, "=<": LE, "<=": LE, "≤": LE, "<": LT, ">=": ">=", "≥": ">=", ">": ">",
        "=\\=": "!=", "\\=": "!=", "!=": "!=", "≠": "!="}


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    out = []
    pos, line, lstart = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - lstart + 1)
        kind = m.lastgroup
        tok = m.group()
        if kind not in ("ws", "comment"):
            out.append(_Tok(kind, tok, line, pos - lstart + 1))
        nl = tok.count("\n")
        if nl:
            line += nl
            lstart = pos + tok.rfind("\n") + 1
        pos = m.end()
    out.append(_Tok("eof", "", line, pos - lstart + 1))
    return out


# linear expression: (coeff map, constant)
_Lin = tuple[dict[str, Fraction], Fraction]


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0
        self.fresh = itertools.count(1)

    # -- token helpers -----------------------------------------------------

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg: str, tok: Optional[_Tok] = None, cls=ParseError):
        t = tok or self.tok
        return cls(msg, t.line, t.col)

    def accept(self, text: str) -> bool:
        if self.tok.text == text and self.tok.kind in ("punct", "neck"):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> None:
        if not self.accept(text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")

    def new_var(self) -> str:
        return f"#{next(self.fresh)}"

    # -- expressions ---------------------------------------------------------

    def linexp(self) -> _Lin:
        cs, k = self.term()
        while self.tok.text in ("+", "-") and self.tok.kind == "punct":
            sign = 1 if self.tok.text == "+" else -1
            self.i += 1
            c2, k2 = self.term()
            for v, a in c2.items():
                cs[v] = cs.get(v, Fraction(0)) + sign * a
            k += sign * k2
        return {v: a for v, a in cs.items() if a}, k

    def term(self) -> _Lin:
        start = self.tok
        cs, k = self.factor()
        while self.accept("*"):
            c2, k2 = self.factor()
            if cs and c2:
                raise self.error("nonlinear product", start, NonlinearError)
            if cs:
                cs, k = {v: a * k2 for v, a in cs.items()}, k * k2
            else:
                cs, k = {v: a * k for v, a in c2.items()}, k * k2
        return cs, k

    def factor(self) -> _Lin:
        t = self.tok
        if self.accept("-"):
            cs, k = self.factor()
            return {v: -a for v, a in cs.items()}, -k
        if self.accept("("):
            e = self.linexp()
            self.expect(")")
            return e
        if t.kind == "int":
            self.i += 1
            return {}, Fraction(int(t.text))
        if t.kind == "var":
            self.i += 1
            name = self.new_var() if t.text == "_" else t.text
            return {name: Fraction(1)}, Fraction(0)
        raise self.error(f"expected an expression, found {t.text or 'end of input'!r}")

    def constraint(self):
        """Returns a list of alternatives (two for a disequality)."""
        lhs = self.linexp()
        t = self.tok
        if t.kind != "rel":
            raise self.error(f"expected a relation, found {t.text or 'end of input'!r}")
        self.i += 1
        rhs = self.linexp()
        rel = _REL[t.text]
        cs = dict(lhs[0])
        for v, a in rhs[0].items():
            cs[v] = cs.get(v, Fraction(0)) - a
        k = lhs[1] - rhs[1]
        if rel == "!=":
            return [LinConstraint.make(cs, k, LT), LinConstraint.make(cs, k, ">")]
        return [LinConstraint.make(cs, k, rel)]

    # -- atoms ---------------------------------------------------------------

    def atom(self, extra: list[LinConstraint]) -> Atom:
        name = self.tok
        self.i += 1
        args: list[str] = []
        if self.accept("("):
            while True:
                cs, k = self.linexp()
                if len(cs) == 1 and k == 0 and next(iter(cs.values())) == 1 \
                        and next(iter(cs)) not in args:
                    args.append(next(iter(cs)))
                else:
                    v = self.new_var()
                    cs = dict(cs)
                    cs[v] = cs.get(v, Fraction(0)) - 1
                    extra.append(LinConstraint.make(cs, k, EQ))
                    args.append(v)
                if not self.accept(","):
                    break
            self.expect(")")
        return Atom(name.text, tuple(args))

    # -- clauses -------------------------------------------------------------

    def _at_label(self) -> bool:
        t = self.tok
        return (t.kind == "ident" and any(ch.isdigit() for ch in t.text)
                and self.peek().text == "." and self.peek(2).kind == "ident")

    def clause(self):
        label = None
        if self._at_label():
            label = self.tok.text
            self.i += 2
        start = self.tok
        if start.kind != "ident":
            raise self.error(f"expected a clause head, found {start.text or 'end of input'!r}")
        cons: list[LinConstraint] = []
        alts: list[list[LinConstraint]] = []
        if start.text == "false" and self.peek().text != "(":
            self.i += 1
            head = None
        else:
            head = self.atom(cons)
        body: list[Atom] = []
        if self.accept(":-"):
            while True:
                t = self.tok
                if t.kind == "ident" and t.text == "true" and self.peek().text != "(":
                    self.i += 1
                elif t.kind == "ident":
                    if t.text == "false":
                        raise self.error("false may not occur in a clause body")
                    body.append(self.atom(cons))
                else:
                    c = self.constraint()
                    if len(c) == 1:
                        cons.extend(c)
                    else:
                        alts.append(c)
                if not self.accept(","):
                    break
        self.expect(".")
        return label, start, head, cons, alts, body

    def program(self) -> Program:
        clauses: list[Clause] = []
        pos = 0
        while self.tok.kind != "eof":
            pos += 1
            label, start, head, cons, alts, body = self.clause()
            cid = label or f"c{pos}"
            variants = list(itertools.product(*alts))
            for j, choice in enumerate(variants, 1):
                clauses.append(Clause(
                    cid if len(variants) == 1 else f"{cid}_{j}",
                    head, ConstraintConj(cons + list(choice)), tuple(body)))
        return Program(tuple(clauses))


def parse_program(text: str) -> Program:
    return _Parser(text).program()


def parse_constraint(text: str) -> LinConstraint:
    p = _Parser(text)
    c = p.constraint()
    if p.tok.kind != "eof":
        raise p.error(f"trailing input {p.tok.text!r}")
    if len(c) != 1:
        raise ParseError("a disequality is not a single constraint")
    return c[0]


def parse_interpretation(text: str) -> Interpretation:
    """Read constrained facts ``p(X,Y) :- phi.``; several facts for one
    predicate form a disjunction."""
    prog = parse_program(text)
    facts: dict[str, ConstrainedFact] = {}
    for c in prog.clauses:
        if c.head is None or c.body:
            raise ParseError(f"clause {c.id} is not a constrained fact")
        extra = c.constraint.vars - set(c.head.args)
        if extra:
            from horndim.constraints import project

            con = project(c.constraint, c.head.args)
        else:
            con = c.constraint
        if c.head.pred in facts:
            old = facts[c.head.pred]
            con = con.rename(dict(zip(c.head.args, old.head_vars)))
            facts[c.head.pred] = ConstrainedFact(old.pred, old.head_vars, old.disjuncts + (con,))
        else:
            facts[c.head.pred] = ConstrainedFact.of(c.head.pred, c.head.args, con)
    return Interpretation(facts)


# -- printing -------------------------------------------------------------------

_PLAIN = re.compile(r"[A-Z][A-Za-z0-9_]*\Z")


def _names() -> Iterable[str]:
    letters = [chr(c) for c in range(ord("A"), ord("Z") + 1)]
    yield from letters
    for n in itertools.count(1):
        for ch in letters:
            yield f"{ch}{n}"


def _var_names(clause: Clause) -> dict[str, str]:
    order: list[str] = []
    for a in ([clause.head] if clause.head else []) + list(clause.body):
        for v in a.args:
            if v not in order:
                order.append(v)
    for v in sorted(clause.constraint.vars):
        if v not in order:
            order.append(v)
    used = {v for v in order if _PLAIN.match(v)}
    gen = (n for n in _names() if n not in used)
    return {v: (v if _PLAIN.match(v) else next(gen)) for v in order}


def _constraint_key(c: LinConstraint):
    # equalities last, roughly as humans write clause bodies
    return (c.rel == EQ, c)


def format_atom(a: Atom, names: dict[str, str], pred_name: Callable[[str], str] = str) -> str:
    p = pred_name(a.pred)
    return f"{p}({','.join(names[v] for v in a.args)})" if a.args else p


def format_clause(c: Clause, label: bool = True,
                  pred_name: Callable[[str], str] = str) -> str:
    names = _var_names(c)
    head = format_atom(c.head, names, pred_name) if c.head is not None else "false"
    items = [format_constraint(x, names.__getitem__)
             for x in sorted(c.constraint, key=_constraint_key)]
    items += [format_atom(a, names, pred_name) for a in c.body]
    text = f"{head} :- {', '.join(items) if items else 'true'}."
    return f"{c.id}. {text}" if label else text


def print_program(p: Program, pred_name: Callable[[str], str] = str) -> str:
    return "".join(format_clause(c, pred_name=pred_name) + "\n" for c in p.clauses)


def format_fact(f: ConstrainedFact) -> str:
    """One line per disjunct, re-readable by :func:`parse_interpretation`."""
    head = Clause("f", Atom(f.pred, f.head_vars))
    if not f.disjuncts:
        return format_clause(head.replace(constraint=ConstraintConj.false()), label=False)
    return "\n".join(format_clause(head.replace(constraint=d), label=False)
                     for d in f.disjuncts)


def print_interpretation(i: Interpretation) -> str:
    return "".join(format_fact(f) + "\n" for f in i)
