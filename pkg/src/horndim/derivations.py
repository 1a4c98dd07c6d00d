"""Trace trees, AND-trees, tree dimension and a brute-force derivation enumerator."""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Optional, Union

from horndim.chc import GOAL, Atom, Program, is_goal_pred
from horndim.constraints import INTEGER, RATIONAL, ConstraintConj, is_sat

# ``root`` argument of :func:`enumerate_trees` meaning "any goal clause".
ANY_GOAL = object()

Root = Union[None, str, object]


class TraceError(ValueError):
    pass


@dataclass(frozen=True)
class TraceTree:
    node: str
    children: tuple["TraceTree", ...] = ()

    @cached_property
    def dim(self) -> int:
        return dim(self)

    @cached_property
    def size(self) -> int:
        return 1 + sum(c.size for c in self.children)

    @cached_property
    def preorder(self) -> tuple[str, ...]:
        return (self.node,) + tuple(i for c in self.children for i in c.preorder)

    @property
    def leaves(self) -> int:
        return 1 if not self.children else sum(c.leaves for c in self.children)

    def map_ids(self, f) -> "TraceTree":
        return TraceTree(f(self.node), tuple(c.map_ids(f) for c in self.children))

    def __str__(self) -> str:
        if not self.children:
            return self.node
        return f"{self.node}({','.join(map(str, self.children))})"


def dim(t: TraceTree) -> int:
    """Horton-Strahler number: 0 at leaves; the largest child dimension,
    plus one when that maximum is attained by two or more children."""
    if not t.children:
        return 0
    ds = [c.dim for c in t.children]
    m = max(ds)
    return m + 1 if ds.count(m) > 1 else m


_TERM_TOKEN = re.compile(r"\s*(?:([A-Za-z_][A-Za-z0-9_]*)|(.))")


def parse_trace(text: str) -> TraceTree:
    """Read the term syntax, e.g. ``c3(c2(c1,c1))``."""
    toks = []
    for m in _TERM_TOKEN.finditer(text.strip()):
        if m.group(1):
            toks.append(("id", m.group(1)))
        elif m.group(2) in "(),":
            toks.append(("p", m.group(2)))
        elif m.group(2).strip():
            raise TraceError(f"unexpected {m.group(2)!r} in trace term")
    pos = 0

    def node() -> TraceTree:
        nonlocal pos
        if pos >= len(toks) or toks[pos][0] != "id":
            raise TraceError(f"expected a clause id in {text!r}")
        name = toks[pos][1]
        pos += 1
        kids = []
        if pos < len(toks) and toks[pos] == ("p", "("):
            pos += 1
            kids.append(node())
            while pos < len(toks) and toks[pos] == ("p", ","):
                pos += 1
                kids.append(node())
            if pos >= len(toks) or toks[pos] != ("p", ")"):
                raise TraceError(f"unbalanced parentheses in {text!r}")
            pos += 1
        return TraceTree(name, tuple(kids))

    t = node()
    if pos != len(toks):
        raise TraceError(f"trailing input in trace term {text!r}")
    return t


def complete_binary(height: int, inner: str = "n", leaf: str = "l") -> TraceTree:
    if height == 0:
        return TraceTree(leaf)
    sub = complete_binary(height - 1, inner, leaf)
    return TraceTree(inner, (sub, sub))


# -- AND-trees --------------------------------------------------------------

@dataclass(frozen=True)
class AndTree:
    atom: Optional[Atom]
    constraint: ConstraintConj
    clause_id: str
    children: tuple["AndTree", ...] = ()

    def nodes(self) -> Iterator["AndTree"]:
        yield self
        for c in self.children:
            yield from c.nodes()

    def to_json(self) -> dict:
        return {
            "atom": str(self.atom) if self.atom is not None else GOAL,
            "clause": self.clause_id,
            "constraint": [str(c) for c in self.constraint],
            "children": [c.to_json() for c in self.children],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def expand(p: Program, t: TraceTree) -> AndTree:
    """Instantiate ``t`` with a fresh renaming per node."""
    counter = itertools.count()

    def build(t: TraceTree, head_args: Optional[tuple[str, ...]]) -> AndTree:
        if t.node not in p:
            raise TraceError(f"unknown clause id {t.node!r}")
        c = p.clause(t.node)
        if len(t.children) != len(c.body):
            raise TraceError(
                f"clause {c.id} has {len(c.body)} body atoms, trace gives {len(t.children)}")
        n = next(counter)
        mapping = {v: f"{v}'{n}" for v in c.vars}
        if head_args is not None:
            mapping.update(zip(c.head.args, head_args))
        for ch, a in zip(t.children, c.body):
            if ch.node not in p:
                raise TraceError(f"unknown clause id {ch.node!r}")
            if p.clause(ch.node).head_pred != a.pred:
                raise TraceError(f"clause {ch.node} does not define {a.pred}")
        r = c.rename(mapping)
        kids = tuple(build(ch, a.args) for ch, a in zip(t.children, r.body))
        return AndTree(r.head, r.constraint, c.id, kids)

    return build(t, None)


def constr(t: AndTree) -> ConstraintConj:
    return ConstraintConj(c for n in t.nodes() for c in n.constraint)


def feasible(p: Program, t: TraceTree, mode: str = INTEGER) -> bool:
    return is_sat(constr(expand(p, t)), mode)


# -- enumeration ------------------------------------------------------------

def _root_clauses(p: Program, root: Root):
    if root is ANY_GOAL:
        return [c for c in p.clauses if c.is_goal]
    if root is None or root == GOAL:
        return [c for c in p.clauses if c.head_pred in (None, GOAL)]
    return p.clauses_for(root)


class Enumerator:
    """Demand-driven enumeration of trace trees by exact node count.

    Results are cached per (predicate, size), so raising the node bound in
    iterative deepening reuses all smaller trees.  With ``feasible_only``,
    subtrees that are rationally infeasible are discarded early (the
    constraints of a subtree are a subset of those of any tree containing it).
    """

    def __init__(self, program: Program, feasible_only: bool = False,
                 max_dim: Optional[int] = None):
        self.p = program
        self.feasible_only = feasible_only
        self.max_dim = max_dim
        self._cache: dict[tuple, list[TraceTree]] = {}
        self._feas: dict[TraceTree, bool] = {}

    def _ok(self, t: TraceTree) -> bool:
        if self.max_dim is not None and t.dim > self.max_dim:
            return False
        if self.feasible_only:
            r = self._feas.get(t)
            if r is None:
                r = self._feas[t] = feasible(self.p, t, RATIONAL)
            return r
        return True

    def _compositions(self, total: int, parts: int):
        if parts == 0:
            if total == 0:
                yield ()
            return
        for first in range(1, total - parts + 2):
            for rest in self._compositions(total - first, parts - 1):
                yield (first,) + rest

    def trees_for_clause(self, cid: str, size: int) -> list[TraceTree]:
        key = ("c", cid, size)
        if key in self._cache:
            return self._cache[key]
        c = self.p.clause(cid)
        out: list[TraceTree] = []
        if not c.body:
            if size == 1:
                t = TraceTree(cid)
                if self._ok(t):
                    out.append(t)
        else:
            for comp in self._compositions(size - 1, len(c.body)):
                pools = [self.trees(a.pred, k) for a, k in zip(c.body, comp)]
                if any(not pool for pool in pools):
                    continue
                for kids in itertools.product(*pools):
                    t = TraceTree(cid, kids)
                    if self._ok(t):
                        out.append(t)
        self._cache[key] = out
        return out

    def trees(self, pred: str, size: int) -> list[TraceTree]:
        key = ("p", pred, size)
        if key not in self._cache:
            out = [t for c in self.p.clauses_for(pred)
                   for t in self.trees_for_clause(c.id, size)]
            out.sort(key=lambda t: t.preorder)
            self._cache[key] = out
        return self._cache[key]

    def rooted(self, root: Root, size: int) -> list[TraceTree]:
        out = [t for c in _root_clauses(self.p, root)
               for t in self.trees_for_clause(c.id, size)]
        out.sort(key=lambda t: t.preorder)
        return out

    def stream(self, root: Root, max_nodes: int) -> Iterator[TraceTree]:
        for n in range(1, max_nodes + 1):
            for t in self.rooted(root, n):
                if self.feasible_only and not feasible(self.p, t, INTEGER):
                    continue
                yield t


def enumerate_trees(p: Program, root: Root, max_nodes: int, *, feasible_only: bool = False,
                    dim_exact: Optional[int] = None, dim_at_most: Optional[int] = None
                    ) -> Iterator[TraceTree]:
    """Every trace tree rooted at a clause for ``root`` with at most
    ``max_nodes`` nodes, by size and then by the preorder id sequence."""
    if max_nodes < 1:
        raise ValueError("max_nodes must be at least 1")
    bound = dim_at_most
    if dim_exact is not None:
        bound = dim_exact if bound is None else min(bound, dim_exact)
    en = Enumerator(p, feasible_only, bound)
    for t in en.stream(root, max_nodes):
        if dim_exact is not None and t.dim != dim_exact:
            continue
        yield t


def is_goal_rooted(p: Program, t: TraceTree) -> bool:
    return t.node in p and is_goal_pred(p.clause(t.node).head_pred)
