"""Safety oracles: bounded unfolding, convex-polyhedra abstract
interpretation, an external SMT-LIB solver, and a portfolio of them."""

from __future__ import annotations

import os
import shutil
import subprocess
import tempfile
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

from horndim.chc import ConstrainedFact, Interpretation, Program, is_goal_pred, model_check, positional
from horndim.constraints import (
    ConstraintConj, entails_all, hull, is_sat, minimize, project, widen,
)
from horndim.derivations import ANY_GOAL, Enumerator, TraceTree, feasible, is_goal_rooted
from horndim.smtlib import export_smtlib_horn, parse_model

SAFE = "safe"
UNSAFE = "unsafe"
UNKNOWN = "unknown"

BOUNDED = "bounded"
POLYHEDRA = "polyhedra"
EXTERNAL = "external"
PORTFOLIO = "portfolio"
KINDS = (BOUNDED, POLYHEDRA, EXTERNAL, PORTFOLIO)

SOLVER_ENV = "HORNDIM_SOLVER"


class OracleError(RuntimeError):
    pass


class ContractViolation(OracleError):
    """An oracle produced a witness that does not justify its verdict."""


@dataclass(frozen=True)
class OracleConfig:
    kind: str = PORTFOLIO
    timeout: float = 60.0
    budget: int = 8
    widening_delay: int = 3
    narrowing: int = 1
    command: Optional[str] = None
    require_witness: bool = True
    max_k: int = 5

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown oracle kind {self.kind!r}")
        if not self.timeout > 0:
            raise ValueError("timeout must be positive")
        if self.budget < 1:
            raise ValueError("node budget must be at least 1")
        if self.widening_delay < 0 or self.narrowing < 0 or self.max_k < 0:
            raise ValueError("delays and caps must be non-negative")

    def solver_command(self) -> Optional[str]:
        return os.environ.get(SOLVER_ENV) or self.command


Witness = Union[Interpretation, TraceTree, None]


@dataclass
class SafeResult:
    status: str
    witness: Witness = None
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.status not in (SAFE, UNSAFE, UNKNOWN):
            raise ValueError(f"bad status {self.status!r}")


class _Deadline:
    def __init__(self, seconds: float):
        self.end = time.monotonic() + seconds

    @property
    def expired(self) -> bool:
        return time.monotonic() > self.end

    @property
    def remaining(self) -> float:
        return max(0.0, self.end - time.monotonic())


# -- bounded unfolding ------------------------------------------------------------

def safe_bounded(p: Program, cfg: OracleConfig = OracleConfig(),
                 deadline: Optional[_Deadline] = None) -> SafeResult:
    """Search for a feasible goal-rooted trace tree by increasing size.

    Never answers safe."""
    deadline = deadline or _Deadline(cfg.timeout)
    en = Enumerator(p, feasible_only=True)
    for n in range(1, cfg.budget + 1):
        if deadline.expired:
            return SafeResult(UNKNOWN, None, {"oracle": BOUNDED, "reason": "timeout"})
        for t in en.rooted(ANY_GOAL, n):
            if feasible(p, t):
                return SafeResult(UNSAFE, t, {"oracle": BOUNDED, "nodes": n})
    return SafeResult(UNKNOWN, None, {"oracle": BOUNDED, "budget": cfg.budget})


# -- convex polyhedra --------------------------------------------------------------

class _Analysis:
    def __init__(self, p: Program):
        self.p = p
        self.table = {q: n for q, n in p.predicates.items() if not is_goal_pred(q)}
        self.order = [q for q in dict.fromkeys(c.head_pred for c in p.clauses)
                      if q is not None and q in self.table]
        self.order += sorted(q for q in self.table if q not in self.order)
        self.tight = {c.id: c.constraint.integer_tightened() for c in p.clauses}

    def _instance(self, c, state) -> Optional[ConstraintConj]:
        parts = list(self.tight[c.id])
        for a in c.body:
            st = state.get(a.pred)
            if st is None:
                return None
            parts.extend(st.rename(dict(zip(positional(len(a.args)), a.args))))
        conj = ConstraintConj(parts)
        return conj if is_sat(conj) else None

    def post(self, c, state) -> Optional[ConstraintConj]:
        conj = self._instance(c, state)
        if conj is None:
            return None
        h = project(conj, c.head.args)
        return h.rename(dict(zip(c.head.args, positional(len(c.head.args))))).integer_tightened()

    def join_posts(self, q, state) -> Optional[ConstraintConj]:
        out = None
        xs = positional(self.table[q])
        for c in self.p.clauses_for(q):
            x = self.post(c, state)
            if x is None:
                continue
            out = x if out is None else hull(out, x, xs).integer_tightened()
        return out

    def inductive(self, state) -> bool:
        for q in self.order:
            new = self.join_posts(q, state)
            if new is None:
                continue
            if state[q] is None or not entails_all(new, state[q]):
                return False
        return True


def safe_polyhedra(p: Program, cfg: OracleConfig = OracleConfig(),
                   deadline: Optional[_Deadline] = None) -> SafeResult:
    deadline = deadline or _Deadline(cfg.timeout)
    an = _Analysis(p)
    state: dict[str, Optional[ConstraintConj]] = {q: None for q in an.table}
    updates = {q: 0 for q in an.table}
    rounds = 0
    changed = True
    while changed:
        changed = False
        rounds += 1
        for q in an.order:
            if deadline.expired:
                return SafeResult(UNKNOWN, None, {"oracle": POLYHEDRA, "reason": "timeout"})
            new = an.join_posts(q, state)
            if new is None:
                continue
            old = state[q]
            if old is not None:
                new = hull(old, new, positional(an.table[q])).integer_tightened()
                if entails_all(new, old):
                    continue
            updates[q] += 1
            if old is not None and updates[q] > cfg.widening_delay:
                new = widen(old, new)
            state[q] = minimize(new)
            changed = True
    for _ in range(cfg.narrowing):
        narrowed = {q: an.join_posts(q, state) for q in an.order}
        narrowed = {q: (minimize(v) if v is not None else None) for q, v in narrowed.items()}
        if an.inductive(narrowed):
            state = narrowed
    info = {"oracle": POLYHEDRA, "rounds": rounds}
    reachable_goal = [c.id for c in p.clauses if c.is_goal and an._instance(c, state) is not None]
    if not reachable_goal:
        facts = {q: (ConstrainedFact.of(q, positional(n), state[q]) if state[q] is not None
                     else ConstrainedFact.bottom(q, n)) for q, n in an.table.items()}
        return SafeResult(SAFE, Interpretation(facts), info)
    info["goal_clauses"] = reachable_goal
    fallback = safe_bounded(p, cfg, deadline)
    if fallback.status == UNSAFE:
        fallback.info.update(info)
        return fallback
    return SafeResult(UNKNOWN, None, info)


# -- external solver ------------------------------------------------------------------

def safe_external(p: Program, cfg: OracleConfig = OracleConfig(),
                  deadline: Optional[_Deadline] = None) -> SafeResult:
    cmd = cfg.solver_command()
    if not cmd:
        raise OracleError(f"no external solver configured (set {SOLVER_ENV})")
    deadline = deadline or _Deadline(cfg.timeout)
    argv = cmd.split()
    if shutil.which(argv[0]) is None and not os.access(argv[0], os.X_OK):
        raise OracleError(f"external solver {argv[0]!r} is not executable")
    text = export_smtlib_horn(p, get_model=True)
    with tempfile.NamedTemporaryFile("w", suffix=".smt2", delete=False) as fh:
        fh.write(text)
        path = fh.name
    info = {"oracle": EXTERNAL, "command": cmd}
    try:
        try:
            proc = subprocess.run(argv + [path], capture_output=True, text=True,
                                  timeout=max(deadline.remaining, 0.01))
        except subprocess.TimeoutExpired:
            info["reason"] = "timeout"
            return SafeResult(UNKNOWN, None, info)
        except OSError as e:
            raise OracleError(f"cannot run {cmd!r}: {e}") from e
    finally:
        os.unlink(path)
    lines = proc.stdout.strip().splitlines()
    first = lines[0].strip() if lines else ""
    if first == "sat":
        model = parse_model("\n".join(lines[1:]), p)
        if model is None:
            info["model"] = "unavailable"
            if cfg.require_witness:
                return SafeResult(UNKNOWN, None, info)
        return SafeResult(SAFE, model, info)
    if first == "unsat":
        replay = safe_bounded(p, cfg, deadline)
        if replay.status == UNSAFE:
            replay.info.update(info)
            return replay
        info["replay"] = "no counterexample within budget"
        if cfg.require_witness:
            return SafeResult(UNKNOWN, None, info)
        return SafeResult(UNSAFE, None, info)
    if first == "unknown" or proc.returncode != 0 and not first:
        return SafeResult(UNKNOWN, None, info)
    if first.startswith("(error") or first == "timeout":
        info["reason"] = first
        return SafeResult(UNKNOWN, None, info)
    raise OracleError(f"malformed solver output: {first[:80]!r}")


# -- portfolio and contract ---------------------------------------------------------------

def safe_portfolio(p: Program, cfg: OracleConfig = OracleConfig()) -> SafeResult:
    tried = []
    members: list[Callable] = [safe_polyhedra, safe_bounded]
    if cfg.solver_command():
        members.append(safe_external)
    for oracle in members:
        r = oracle(p, cfg, _Deadline(cfg.timeout))
        tried.append(r.info.get("oracle"))
        if r.status != UNKNOWN:
            r.info["portfolio"] = tried
            return r
    return SafeResult(UNKNOWN, None, {"oracle": PORTFOLIO, "portfolio": tried})


_ORACLES = {BOUNDED: safe_bounded, POLYHEDRA: safe_polyhedra, EXTERNAL: safe_external,
            PORTFOLIO: safe_portfolio}


def check_contract(p: Program, r: SafeResult) -> SafeResult:
    """Raise unless the witness justifies the verdict on ``p``."""
    if r.status == SAFE and isinstance(r.witness, Interpretation):
        ok, bad = model_check(p, r.witness)
        if not ok:
            raise ContractViolation(f"safe witness violates clauses {bad}")
        r.info["model_checked"] = True
    elif r.status == UNSAFE and r.witness is not None:
        if not is_goal_rooted(p, r.witness) or not feasible(p, r.witness):
            raise ContractViolation(f"counterexample {r.witness} is not a feasible goal derivation")
    return r


def safe(p: Program, cfg: OracleConfig = OracleConfig()) -> SafeResult:
    """Query the configured oracle and validate its answer."""
    oracle = _ORACLES[cfg.kind]
    start = time.monotonic()
    r = oracle(p, cfg) if cfg.kind == PORTFOLIO else oracle(p, cfg, _Deadline(cfg.timeout))
    r.info.setdefault("seconds", round(time.monotonic() - start, 3))
    return check_contract(p, r)
