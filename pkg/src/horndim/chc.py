"""Data model for constrained Horn clauses.

Atoms are kept *normalised*: every argument is a variable and no variable
repeats inside one atom.  The parser introduces fresh variables and
equalities for literals, expressions and repeated variables, so the rest
of the library never has to unify terms.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Optional, Sequence

from horndim.constraints import (
    BudgetExhausted, ConstraintConj, LinConstraint, entails, is_sat,
)
from horndim.constraints.ops import INTEGER

GOAL = "false"


class ArityError(ValueError):
    pass


class ProgramError(ValueError):
    pass


def is_goal_pred(name: Optional[str]) -> bool:
    """``false`` itself and any versioned copy of it (``false__le1`` ...)."""
    return name is None or name == GOAL or name.startswith(GOAL + "__")


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple[str, ...] = ()

    def __post_init__(self):
        if len(set(self.args)) != len(self.args):
            raise ValueError(f"atom {self.pred} repeats a variable: {self.args}")

    @property
    def arity(self) -> int:
        return len(self.args)

    def rename(self, mapping: Mapping[str, str]) -> "Atom":
        return Atom(self.pred, tuple(mapping.get(a, a) for a in self.args))

    def with_pred(self, pred: str) -> "Atom":
        return Atom(pred, self.args)

    def __str__(self) -> str:
        return f"{self.pred}({','.join(self.args)})" if self.args else self.pred


@dataclass(frozen=True)
class Clause:
    id: str
    head: Optional[Atom]
    constraint: ConstraintConj = field(default_factory=ConstraintConj)
    body: tuple[Atom, ...] = ()

    @property
    def head_pred(self) -> Optional[str]:
        return self.head.pred if self.head is not None else None

    @property
    def is_goal(self) -> bool:
        return is_goal_pred(self.head_pred)

    @property
    def is_linear(self) -> bool:
        return len(self.body) <= 1

    @property
    def vars(self) -> frozenset[str]:
        vs = set(self.constraint.vars)
        if self.head is not None:
            vs.update(self.head.args)
        for a in self.body:
            vs.update(a.args)
        return frozenset(vs)

    def rename(self, mapping: Mapping[str, str]) -> "Clause":
        return Clause(
            self.id,
            self.head.rename(mapping) if self.head is not None else None,
            self.constraint.rename(mapping),
            tuple(a.rename(mapping) for a in self.body),
        )

    def replace(self, **kw) -> "Clause":
        d = dict(id=self.id, head=self.head, constraint=self.constraint, body=self.body)
        d.update(kw)
        return Clause(**d)

    def canonical(self) -> "Clause":
        """Rename variables to ``V0, V1, ...`` by order of first occurrence."""
        order: list[str] = []
        for a in ([self.head] if self.head else []) + list(self.body):
            for v in a.args:
                if v not in order:
                    order.append(v)
        for v in sorted(self.constraint.vars):
            if v not in order:
                order.append(v)
        return self.rename({v: f"V{i}" for i, v in enumerate(order)})

    def __str__(self) -> str:
        from horndim.syntax import format_clause

        return format_clause(self)


@dataclass(frozen=True)
class Program:
    clauses: tuple[Clause, ...] = ()
    instrumented: bool = False

    def __post_init__(self):
        object.__setattr__(self, "clauses", tuple(self.clauses))
        ids = [c.id for c in self.clauses]
        if len(set(ids)) != len(ids):
            dup = sorted({i for i in ids if ids.count(i) > 1})
            raise ProgramError(f"duplicate clause ids: {dup}")
        table: dict[str, int] = {}
        for c in self.clauses:
            atoms = ([c.head] if c.head is not None else []) + list(c.body)
            for a in atoms:
                if table.setdefault(a.pred, a.arity) != a.arity:
                    raise ArityError(
                        f"predicate {a.pred} used with arities {table[a.pred]} and {a.arity}"
                        f" (clause {c.id})")
            for a in c.body:
                if is_goal_pred(a.pred):
                    raise ProgramError(f"clause {c.id}: {a.pred} may not occur in a body")
        object.__setattr__(self, "_table", table)
        object.__setattr__(self, "_by_id", {c.id: c for c in self.clauses})

    # -- lookup ------------------------------------------------------------

    @property
    def predicates(self) -> dict[str, int]:
        """Predicate table ``name -> arity`` (the distinguished ``false`` head excluded)."""
        return dict(self._table)

    def clause(self, cid: str) -> Clause:
        try:
            return self._by_id[cid]
        except KeyError:
            raise KeyError(f"unknown clause id {cid!r}") from None

    def __contains__(self, cid: str) -> bool:
        return cid in self._by_id

    def __iter__(self) -> Iterator[Clause]:
        return iter(self.clauses)

    def __len__(self) -> int:
        return len(self.clauses)

    def clauses_for(self, pred: Optional[str]) -> list[Clause]:
        return [c for c in self.clauses if c.head_pred == pred]

    def goal_clauses(self) -> list[Clause]:
        return [c for c in self.clauses if c.is_goal]

    @property
    def is_linear(self) -> bool:
        return all(c.is_linear for c in self.clauses)

    def canonical(self) -> tuple[Clause, ...]:
        return tuple(c.canonical() for c in self.clauses)

    def same_as(self, other: "Program") -> bool:
        """Equality up to per-clause variable renaming."""
        return self.canonical() == other.canonical()

    def with_clauses(self, clauses: Iterable[Clause]) -> "Program":
        return Program(tuple(clauses), self.instrumented)

    def extend(self, clauses: Iterable[Clause]) -> "Program":
        return Program(self.clauses + tuple(clauses), self.instrumented)

    def __str__(self) -> str:
        from horndim.syntax import print_program

        return print_program(self)


# -- interpretations ----------------------------------------------------------

@dataclass(frozen=True)
class ConstrainedFact:
    """``pred(head_vars) <- d1 \\/ d2 \\/ ...``.

    Ordinary facts carry exactly one disjunct; lifted facts may carry several;
    an empty disjunction denotes the empty relation.
    """

    pred: str
    head_vars: tuple[str, ...]
    disjuncts: tuple[ConstraintConj, ...]

    def __post_init__(self):
        if len(set(self.head_vars)) != len(self.head_vars):
            raise ValueError("head variables must be distinct")
        extra = set().union(*(d.vars for d in self.disjuncts)) - set(self.head_vars) \
            if self.disjuncts else set()
        if extra:
            raise ValueError(f"fact for {self.pred} mentions non-head variables {sorted(extra)}")

    @classmethod
    def of(cls, pred: str, head_vars: Sequence[str], constraint: ConstraintConj
           ) -> "ConstrainedFact":
        return cls(pred, tuple(head_vars), (constraint,))

    @classmethod
    def top(cls, pred: str, arity: int) -> "ConstrainedFact":
        return cls(pred, positional(arity), (ConstraintConj(),))

    @classmethod
    def bottom(cls, pred: str, arity: int) -> "ConstrainedFact":
        return cls(pred, positional(arity), ())

    @property
    def constraint(self) -> ConstraintConj:
        if len(self.disjuncts) != 1:
            raise ValueError(f"fact for {self.pred} is a disjunction of {len(self.disjuncts)}")
        return self.disjuncts[0]

    @property
    def arity(self) -> int:
        return len(self.head_vars)

    def instantiate(self, args: Sequence[str]) -> list[ConstraintConj]:
        m = dict(zip(self.head_vars, args))
        return [d.rename(m) for d in self.disjuncts]

    def __str__(self) -> str:
        head = str(Atom(self.pred, self.head_vars))
        if not self.disjuncts:
            return f"{head} <- false"
        return f"{head} <- " + " ; ".join(f"({d})" for d in self.disjuncts)


def positional(n: int) -> tuple[str, ...]:
    return tuple(f"X{i + 1}" for i in range(n))


@dataclass(frozen=True)
class Interpretation:
    facts: Mapping[str, ConstrainedFact] = field(default_factory=dict)

    def __post_init__(self):
        for k, f in self.facts.items():
            if k != f.pred:
                raise ValueError(f"fact keyed {k} is for predicate {f.pred}")

    @classmethod
    def from_facts(cls, facts: Iterable[ConstrainedFact]) -> "Interpretation":
        return cls({f.pred: f for f in facts})

    def __getitem__(self, pred: str) -> ConstrainedFact:
        return self.facts[pred]

    def __contains__(self, pred: str) -> bool:
        return pred in self.facts

    def __iter__(self) -> Iterator[ConstrainedFact]:
        return iter(self.facts[k] for k in sorted(self.facts))

    def __len__(self) -> int:
        return len(self.facts)

    def __str__(self) -> str:
        return "\n".join(str(f) for f in self)


# -- satisfaction -------------------------------------------------------------

def _maybe_sat(premise: list[LinConstraint]) -> bool:
    """Integer satisfiability; an exhausted search counts as satisfiable."""
    tight = [c.integer_tightened() for c in premise]
    if not is_sat(tight):
        return False
    try:
        return is_sat(tight, INTEGER)
    except BudgetExhausted:
        return True


def _implies_disjunction(premise: list[LinConstraint], disjuncts: list[ConstraintConj]) -> bool:
    """premise |= d1 \\/ ... \\/ dn over the integers.

    Refutes ``premise /\\ ~d1 /\\ ... /\\ ~dn`` by case-splitting on which
    conjunct of each disjunct is violated.
    """
    if not _maybe_sat(premise):
        return True
    tight = [c.integer_tightened() for c in premise]
    # rational reasoning is sound here: incompatible disjuncts cannot help,
    # and rational entailment implies integer entailment
    live = [d for d in disjuncts if is_sat(tight + list(d.items))]
    if not live:
        return False
    open_parts = []
    for d in live:
        missing = [c for c in d if not entails(tight, c)]
        if not missing:
            return True
        open_parts.append((len(missing), missing, d))
    _, missing, chosen = min(open_parts, key=lambda x: x[0])
    rest = [d for d in live if d is not chosen]
    for c in missing:
        for n in c.negations():
            if not _implies_disjunction(premise + [n], rest):
                return False
    return True


def model_check(program: Program, interp: Interpretation) -> tuple[bool, list[str]]:
    """Check that ``interp`` satisfies every clause; goal heads mean *false*.

    Variables range over the integers.

    Returns ``(ok, violated_clause_ids)``.
    """
    for pred in program.predicates:
        if not is_goal_pred(pred) and pred not in interp:
            raise KeyError(f"interpretation has no fact for {pred}")
    violated = []
    for c in program.clauses:
        body_options = [interp[a.pred].instantiate(a.args) for a in c.body]
        if c.is_goal:
            head_disj: list[ConstraintConj] = []
        else:
            head_disj = interp[c.head.pred].instantiate(c.head.args)
        ok = True
        for choice in itertools.product(*body_options):
            premise = list(c.constraint)
            for d in choice:
                premise.extend(d)
            if not _implies_disjunction(premise, head_disj):
                ok = False
                break
        if not ok:
            violated.append(c.id)
    return (not violated, violated)
