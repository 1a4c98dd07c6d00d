"""Partial evaluation with property-based abstraction, and its two
dimension-bounding instantiations (at most k / at least k)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple, Optional, Sequence

from horndim.chc import GOAL, Atom, Clause, ConstrainedFact, Program, positional
from horndim.constraints import (
    ConstraintConj, LinConstraint, entails_all, is_sat, minimize, project,
)
from horndim.constraints.linear import EQ, LE
from horndim.instrument import instrument_with_provenance


class PEError(RuntimeError):
    pass


@dataclass(frozen=True)
class AbstractFact:
    pred: str
    indices: frozenset[int]

    def sort_key(self):
        return (self.pred, sorted(self.indices))


class PsiSet:
    """Ordered property list; each property is a constrained fact."""

    def __init__(self, facts: Sequence[ConstrainedFact]):
        self.facts = tuple(
            ConstrainedFact.of(f.pred, positional(f.arity),
                               f.constraint.rename(dict(zip(f.head_vars, positional(f.arity)))))
            for f in facts)
        self._by_pred: dict[str, list[int]] = {}
        for i, f in enumerate(self.facts):
            self._by_pred.setdefault(f.pred, []).append(i)

    def __len__(self) -> int:
        return len(self.facts)

    def __getitem__(self, i: int) -> ConstrainedFact:
        return self.facts[i]

    def indices_for(self, pred: str) -> list[int]:
        return self._by_pred.get(pred, [])

    def arity(self, pred: str) -> int:
        idx = self.indices_for(pred)
        return self.facts[idx[0]].arity if idx else 0

    def concretize(self, a: AbstractFact, arity: Optional[int] = None) -> ConstrainedFact:
        if arity is None:
            arity = self.arity(a.pred)
        cons = [c for i in sorted(a.indices) for c in self.facts[i].constraint]
        return ConstrainedFact.of(a.pred, positional(arity), ConstraintConj(cons))


class Specialization(NamedTuple):
    program: Program
    provenance: dict[str, str]


def _as_positional(f: ConstrainedFact) -> ConstrainedFact:
    pos = positional(f.arity)
    if f.head_vars == pos:
        return f
    return ConstrainedFact.of(f.pred, pos, f.constraint.rename(dict(zip(f.head_vars, pos))))


def _require_heads(p: Program) -> None:
    for c in p.clauses:
        if c.head is None:
            raise PEError(f"clause {c.id} has no head atom; instrument the program first")


def _unfold(fact: ConstrainedFact, c: Clause) -> Optional[ConstraintConj]:
    """theta /\\ phi for fact ``p(x) <- theta`` against clause ``c`` if satisfiable."""
    theta = fact.constraint.rename(dict(zip(fact.head_vars, c.head.args)))
    both = theta & c.constraint
    return both if is_sat(both) else None


def _body_fact(both: ConstraintConj, a: Atom) -> ConstrainedFact:
    return ConstrainedFact.of(a.pred, a.args, project(both, a.args))


def pe_step(p: Program, s: Iterable[ConstrainedFact]) -> set[ConstrainedFact]:
    _require_heads(p)
    out: set[ConstrainedFact] = set()
    for f in s:
        for c in p.clauses_for(f.pred):
            both = _unfold(f, c)
            if both is None:
                continue
            for a in c.body:
                out.add(_as_positional(_body_fact(both, a)))
    return out


def rep(psi: PsiSet, f: ConstrainedFact) -> AbstractFact:
    theta = f.constraint
    idx = set()
    for i in psi.indices_for(f.pred):
        prop = psi[i].constraint.rename(dict(zip(psi[i].head_vars, f.head_vars)))
        if entails_all(theta, prop):
            idx.add(i)
    return AbstractFact(f.pred, frozenset(idx))


def abstract(psi: PsiSet, s: Iterable[ConstrainedFact]) -> set[AbstractFact]:
    return {rep(psi, f) for f in s}


def lfp(p: Program, psi: PsiSet, s0: Iterable[ConstrainedFact]) -> set[AbstractFact]:
    """Least fixpoint of ``S -> abstract(S0) | abstract(pe_step(S))``."""
    arity = p.predicates
    current = abstract(psi, s0)
    cap = sum(2 ** len(psi.indices_for(q)) for q in arity) + 1
    frontier = set(current)
    rounds = 0
    while frontier:
        rounds += 1
        if rounds > cap:
            raise PEError(f"partial evaluation did not converge within {cap} rounds")
        facts = [psi.concretize(a, arity.get(a.pred)) for a in sorted(frontier, key=AbstractFact.sort_key)]
        new = abstract(psi, pe_step(p, facts))
        frontier = new - current
        current |= new
    return current


def default_version(pred: str, a: AbstractFact) -> str:
    if not a.indices:
        return f"{pred}__top"
    return f"{pred}__v" + "_".join(str(i) for i in sorted(a.indices))


def pe_cls(p: Program, psi: PsiSet, s_star: Iterable[AbstractFact],
           version: Callable[[str, AbstractFact], str] = default_version) -> Specialization:
    _require_heads(p)
    arity = p.predicates
    states = set(s_star)
    out: list[Clause] = []
    prov: dict[str, str] = {}
    for a in sorted(states, key=AbstractFact.sort_key):
        fact = psi.concretize(a, arity.get(a.pred))
        head_name = version(a.pred, a)
        tag = head_name[len(a.pred):].lstrip("_") or "v"
        for c in p.clauses_for(a.pred):
            both = _unfold(fact, c)
            if both is None:
                continue
            body = []
            for b in c.body:
                va = rep(psi, _body_fact(both, b))
                if va not in states:
                    raise PEError(f"version {sorted(va.indices)} of {b.pred} is not in the fixpoint")
                body.append(Atom(version(b.pred, va), b.args))
            cid = f"{c.id}__{tag}"
            out.append(Clause(cid, Atom(head_name, c.head.args), minimize(both), tuple(body)))
            prov[cid] = c.id
    return Specialization(Program(tuple(out)), prov)


def prune_empty_versions(spec: Specialization) -> Specialization:
    """Drop clauses calling a version that has no clauses, until stable."""
    clauses = list(spec.program.clauses)
    while True:
        defined = {c.head_pred for c in clauses}
        keep = [c for c in clauses if all(b.pred in defined for b in c.body)]
        if len(keep) == len(clauses):
            break
        clauses = keep
    prog = Program(tuple(clauses))
    return Specialization(prog, {c.id: spec.provenance[c.id] for c in prog.clauses})


def partial_evaluate(p: Program, psi: Sequence[ConstrainedFact] | PsiSet,
                     s0: Iterable[ConstrainedFact],
                     version: Callable[[str, AbstractFact], str] = default_version
                     ) -> Specialization:
    ps = psi if isinstance(psi, PsiSet) else PsiSet(psi)
    return pe_cls(p, ps, lfp(p, ps, s0), version)


# -- dimension instantiations ---------------------------------------------------

AT_MOST = "atmost"
AT_LEAST = "atleast"


def _dim_fact(pred: str, arity: int, coeff: int, const: int, rel: str) -> ConstrainedFact:
    xs = positional(arity)
    return ConstrainedFact.of(pred, xs, ConstraintConj([LinConstraint.make({xs[-1]: coeff}, const, rel)]))


def _nonnegative_body_dims(p: Program) -> Program:
    out = []
    for c in p.clauses:
        extra = [LinConstraint.make({a.args[-1]: -1}, 0, LE) for a in c.body]
        out.append(c.replace(constraint=c.constraint & extra))
    return p.with_clauses(out)


def _dimension_version(kind: str, psi: PsiSet) -> Callable[[str, AbstractFact], str]:
    def name(pred: str, a: AbstractFact) -> str:
        if not a.indices:
            return f"{pred}__top"
        props = [psi[i].constraint.items[0] for i in a.indices]
        bounds = [(c.rel, -c.const / c.coeffs[0][1], c.coeffs[0][1]) for c in props]
        if kind == AT_MOST:
            eqs = [int(b) for rel, b, _ in bounds if rel == EQ]
            if eqs:
                return f"{pred}__eq{min(eqs)}"
            return f"{pred}__le{min(int(b) for _, b, _ in bounds)}"
        d = max(int(b) for _, b, _ in bounds)
        return f"{pred}__ge{d}" if d > 0 else f"{pred}__any"
    return name


def _dimension_pe(p: Program, k: int, kind: str) -> Specialization:
    if k < 0:
        raise ValueError("dimension bound must be non-negative")
    fresh = Program(p.clauses)
    pdim, inst_prov = instrument_with_provenance(fresh)
    pdim = _nonnegative_body_dims(pdim)
    psi_facts, s0 = [], []
    for pred, n in sorted(pdim.predicates.items()):
        if kind == AT_MOST:
            for d in range(k + 1):
                psi_facts.append(_dim_fact(pred, n, 1, -d, EQ))
                psi_facts.append(_dim_fact(pred, n, 1, -d, LE))
            s0.append(_dim_fact(pred, n, 1, -k, LE))
            s0.append(_dim_fact(pred, n, 1, -k, EQ))
        else:
            for d in range(k + 1):
                psi_facts.append(_dim_fact(pred, n, 1, -d, ">="))
            s0.append(_dim_fact(pred, n, 1, -k, ">="))
    psi = PsiSet(psi_facts)
    spec = partial_evaluate(pdim, psi, s0, _dimension_version(kind, psi))
    spec = prune_empty_versions(spec)
    return Specialization(spec.program,
                          {cid: inst_prov[src] for cid, src in spec.provenance.items()})


def atmost(p: Program, k: int) -> Specialization:
    """Clauses whose derivations have dimension at most ``k``; for every
    predicate ``q`` the version ``q__le<k>`` holds exactly those."""
    return _dimension_pe(p, k, AT_MOST)


def atleast(p: Program, k: int) -> Specialization:
    """Clauses whose derivations have dimension at least ``k``
    (version ``q__ge<k>``, or ``q__any`` when ``k`` is 0)."""
    return _dimension_pe(p, k, AT_LEAST)


# -- version names ----------------------------------------------------------------

def split_version(pred: str) -> tuple[str, Optional[str]]:
    """``fib__le1`` -> ``("fib", "le1")``; unversioned names give ``None``."""
    base, sep, tag = pred.rpartition("__")
    if not sep:
        return pred, None
    return base, tag


def base_name(pred: str) -> str:
    return split_version(pred)[0]


def version_constraint(pred: str, dim_var: str) -> Optional[ConstraintConj]:
    """The dimension property encoded by a dimension version name."""
    _, tag = split_version(pred)
    if tag is None or tag == "top":
        return ConstraintConj() if tag == "top" else None
    for prefix, rel in (("eq", EQ), ("le", LE), ("ge", ">=")):
        if tag.startswith(prefix) and tag[len(prefix):].isdigit():
            d = int(tag[len(prefix):])
            return ConstraintConj([LinConstraint.make({dim_var: 1}, -d, rel)])
    if tag == "any":
        return ConstraintConj([LinConstraint.make({dim_var: 1}, 0, ">=")])
    return None


_DISPLAY = {"eq": "=", "le": "≤", "ge": "≥"}


def display_name(pred: str) -> str:
    """``fib__le1`` -> ``fib^{≤1}``; ``fib__any`` -> ``fib^{any}``."""
    base, tag = split_version(pred)
    if tag is None:
        return pred
    if tag == "any":
        return f"{base}^{{any}}"
    for prefix, sym in _DISPLAY.items():
        if tag.startswith(prefix) and tag[len(prefix):].isdigit():
            return f"{base}^{{{sym}{tag[len(prefix):]}}}"
    return f"{base}^{{{tag}}}"


def goal_versions(p: Program) -> list[str]:
    return sorted({c.head_pred for c in p.clauses if c.head_pred and base_name(c.head_pred) == GOAL})


def strip_dimensions(p: Program) -> Program:
    from horndim.instrument import erase_dimensions

    return erase_dimensions(p)
