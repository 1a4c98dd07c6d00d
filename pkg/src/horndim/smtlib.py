"""SMT-LIB2 (logic HORN) export, and parsing of solver models back into
constrained facts."""

from __future__ import annotations

import re
from fractions import Fraction
from typing import NamedTuple, Optional

from horndim.chc import Clause, ConstrainedFact, Interpretation, Program, is_goal_pred
from horndim.constraints import ConstraintConj, LinConstraint
from horndim.constraints.linear import EQ, LE, LT, TRUE
from horndim.constraints.simplex import is_sat_rational


class SmtLibError(ValueError):
    pass


_SIMPLE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")


def _sym(name: str) -> str:
    if _SIMPLE.match(name):
        return name
    if "|" in name or "\\" in name:
        raise SmtLibError(f"cannot quote symbol {name!r}")
    return f"|{name}|"


def _num(c: Fraction) -> str:
    if c.denominator != 1:
        raise SmtLibError(f"non-integer coefficient {c}")
    return str(c) if c >= 0 else f"(- {-c})"


def _lin(c: LinConstraint, name) -> str:
    if c == TRUE:
        return "true"
    if not c.coeffs:
        return "false"
    terms = [name(v) if a == 1 else f"(* {_num(a)} {name(v)})" for v, a in c.coeffs]
    lhs = terms[0] if len(terms) == 1 else f"(+ {' '.join(terms)})"
    op = {EQ: "=", LE: "<=", LT: "<"}[c.rel]
    return f"({op} {lhs} {_num(-c.const)})"


def _atom(pred: str, args, name) -> str:
    return f"({_sym(pred)} {' '.join(name(a) for a in args)})" if args else _sym(pred)


def _clause(c: Clause) -> str:
    order = sorted(c.vars)
    names = {v: _sym(v) for v in order}
    name = names.__getitem__
    body = [_lin(x, name) for x in c.constraint] + [_atom(a.pred, a.args, name) for a in c.body]
    if not body:
        premise = "true"
    elif len(body) == 1:
        premise = body[0]
    else:
        premise = f"(and {' '.join(body)})"
    head = "false" if c.is_goal else _atom(c.head.pred, c.head.args, name)
    impl = f"(=> {premise} {head})"
    if not order:
        return f"(assert {impl})"
    binders = " ".join(f"({names[v]} Int)" for v in order)
    return f"(assert (forall ({binders}) {impl}))"


def export_smtlib_horn(p: Program, get_model: bool = False) -> str:
    lines = ["(set-logic HORN)"]
    for pred, n in sorted(p.predicates.items()):
        if is_goal_pred(pred):
            continue
        lines.append(f"(declare-fun {_sym(pred)} ({' '.join(['Int'] * n)}) Bool)")
    for c in p.clauses:
        lines.append(f"; {c.id}")
        lines.append(_clause(c))
    lines.append("(check-sat)")
    if get_model:
        lines.append("(get-model)")
    return "\n".join(lines) + "\n"


# -- s-expressions ------------------------------------------------------------------

_SEXP_TOKEN = re.compile(r'\s*(?:(\()|(\))|(\|[^|]*\|)|("(?:[^"]|"")*")|(;[^\n]*)|([^\s()|";]+))')


def parse_sexps(text: str) -> list:
    stack: list[list] = [[]]
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _SEXP_TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise SmtLibError(f"cannot tokenize solver output near {text[pos:pos + 20]!r}")
        pos = m.end()
        if m.group(1):
            stack.append([])
        elif m.group(2):
            if len(stack) == 1:
                raise SmtLibError("unbalanced ')' in solver output")
            done = stack.pop()
            stack[-1].append(done)
        elif m.group(3):
            stack[-1].append(m.group(3)[1:-1])
        elif m.group(4) or m.group(5):
            continue
        else:
            stack[-1].append(m.group(6))
    if len(stack) != 1:
        raise SmtLibError("unbalanced '(' in solver output")
    return stack[0]


# -- formulas to DNF -------------------------------------------------------------------

_MAX_DISJUNCTS = 64


class _Unsupported(Exception):
    pass


class _Formula(NamedTuple):
    """A boolean ``let`` binding, expanded where it is used."""
    expr: object
    env: dict


def _term(e, env) -> tuple[dict[str, Fraction], Fraction]:
    if isinstance(e, str):
        if e in env and not isinstance(env[e], _Formula):
            return env[e]
        if re.fullmatch(r"\d+", e):
            return {}, Fraction(int(e))
        if re.fullmatch(r"\d+\.\d+", e):
            return {}, Fraction(e)
        raise _Unsupported(e)
    head, *args = e
    if head == "+":
        cs: dict[str, Fraction] = {}
        k = Fraction(0)
        for a in args:
            c2, k2 = _term(a, env)
            for v, x in c2.items():
                cs[v] = cs.get(v, Fraction(0)) + x
            k += k2
        return cs, k
    if head == "-":
        parts = [_term(a, env) for a in args]
        if len(parts) == 1:
            c, k = parts[0]
            return {v: -x for v, x in c.items()}, -k
        cs, k = dict(parts[0][0]), parts[0][1]
        for c2, k2 in parts[1:]:
            for v, x in c2.items():
                cs[v] = cs.get(v, Fraction(0)) - x
            k -= k2
        return cs, k
    if head == "*":
        cs, k = {}, Fraction(1)
        for a in args:
            c2, k2 = _term(a, env)
            if cs and c2:
                raise _Unsupported("nonlinear")
            if c2:
                cs = {v: x * k for v, x in c2.items()}
                k = k * k2
            else:
                cs = {v: x * k2 for v, x in cs.items()}
                k = k * k2
        return cs, k
    if head == "/" and len(args) == 2:
        c, k = _term(args[0], env)
        c2, k2 = _term(args[1], env)
        if c2 or k2 == 0:
            raise _Unsupported("division")
        return {v: x / k2 for v, x in c.items()}, k / k2
    raise _Unsupported(str(head))


def _atom_dnf(op: str, a, b, env) -> list[list[LinConstraint]]:
    (c1, k1), (c2, k2) = _term(a, env), _term(b, env)
    cs = dict(c1)
    for v, x in c2.items():
        cs[v] = cs.get(v, Fraction(0)) - x
    k = k1 - k2
    if op == "distinct":
        return [[LinConstraint.make(cs, k, LT)], [LinConstraint.make(cs, k, ">")]]
    rel = {"=": EQ, "<=": LE, "<": LT, ">=": ">=", ">": ">"}[op]
    return [[LinConstraint.make(cs, k, rel)]]


def _dnf(e, env, positive: bool = True) -> list[list[LinConstraint]]:
    if isinstance(e, str):
        if e in ("true", "false"):
            return [[]] if (e == "true") == positive else []
        bound = env.get(e)
        if isinstance(bound, _Formula):
            return _dnf(bound.expr, bound.env, positive)
        raise _Unsupported(e)
    head, *args = e
    if head == "not":
        return _dnf(args[0], env, not positive)
    if head in ("and", "or"):
        conj = (head == "and") == positive
        parts = [_dnf(a, env, positive) for a in args]
        if not conj:
            return [d for part in parts for d in part]
        out = [[]]
        for part in parts:
            # drop contradictory partial products so CNF-shaped models stay small
            out = [x + y for x in out for y in part if is_sat_rational(x + y)]
            if len(out) > _MAX_DISJUNCTS:
                raise _Unsupported("formula too large")
        return out
    if head == "=>" and len(args) == 2:
        return _dnf(["or", ["not", args[0]], args[1]], env, positive)
    if head == "let":
        new = dict(env)
        for name, val in args[0]:
            try:
                new[name] = _term(val, env)
            except _Unsupported:
                new[name] = _Formula(val, env)
        return _dnf(args[1], new, positive)
    if head in ("=", "<=", "<", ">=", ">") and len(args) == 2:
        pos = _atom_dnf(head, args[0], args[1], env)
        if positive:
            return pos
        (c,), = pos
        return [[n] for n in c.negations()]
    if head == "distinct" and len(args) == 2:
        return _atom_dnf("distinct" if positive else "=", args[0], args[1], env)
    raise _Unsupported(str(head))


def parse_model(text: str, program: Program) -> Optional[Interpretation]:
    """Interpretation from a ``(get-model)`` answer, or ``None`` when the
    model uses constructs outside linear arithmetic."""
    try:
        sexps = parse_sexps(text)
    except SmtLibError:
        return None
    defs = []
    for s in sexps:
        if not isinstance(s, list) or not s:
            continue
        if s[0] == "define-fun":
            defs.append(s)
        else:
            # ``(model ...)`` or a bare parenthesised list of definitions
            defs.extend(s[1:] if s[0] == "model" else s)
    table = {q: n for q, n in program.predicates.items() if not is_goal_pred(q)}
    facts: dict[str, ConstrainedFact] = {}
    for d in defs:
        if not (isinstance(d, list) and len(d) == 5 and d[0] == "define-fun"):
            continue
        name, params, _, body = d[1], d[2], d[3], d[4]
        if name not in table or len(params) != table[name]:
            continue
        hv = tuple(f"X{i + 1}" for i in range(len(params)))
        env = {prm[0]: ({v: Fraction(1)}, Fraction(0)) for prm, v in zip(params, hv)}
        try:
            disj = _dnf(body, env)
        except (_Unsupported, KeyError, ValueError):
            return None
        facts[name] = ConstrainedFact(name, hv, tuple(ConstraintConj(x) for x in disj))
    if set(facts) != set(table):
        return None
    return Interpretation(facts)
