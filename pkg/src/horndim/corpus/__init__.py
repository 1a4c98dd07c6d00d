"""Bundled example programs with their known verdicts."""

from __future__ import annotations

from importlib import resources
from typing import NamedTuple, Optional

from horndim.chc import Program
from horndim.instrument import instrument
from horndim.syntax import parse_program


class CorpusEntry(NamedTuple):
    name: str
    program: Program
    status: str
    dimension_bound: Optional[int]


# name -> (expected status, dimension bound).  The bound is the k at which
# solve_partition is known to conclude, or the proved bound on derivation
# dimension for entries that come with a dimension property.
_EXPECTED = {
    "fib": ("safe", 1),
    "mc91": ("safe", 2),
    "counting_change": ("safe", 5),
    "revlen": ("safe", 0),
    "binary_p": ("safe", None),
    "two_goals": ("unsafe", 0),
}

# known counterexamples, as trace terms over the entry's clause ids
WITNESSES = {"two_goals": "c2(c4)"}


def _text(filename: str) -> str:
    return resources.files(__name__).joinpath(filename).read_text(encoding="utf-8")


def property_text(name: str) -> Optional[str]:
    """Dimension property clauses for ``name`` (over the instrumented
    predicates), or ``None``."""
    try:
        return _text(f"{name}.prop.chc")
    except FileNotFoundError:
        return None


def load(name: str) -> Program:
    if name not in _EXPECTED:
        raise KeyError(f"no corpus program named {name!r}")
    return parse_program(_text(f"{name}.chc"))


def corpus() -> list[CorpusEntry]:
    return [CorpusEntry(name, load(name), status, bound)
            for name, (status, bound) in _EXPECTED.items()]


def verification_task(name: str) -> Program:
    """The program whose safety is the expected verdict: the source program,
    or its instrumented form plus the dimension property when there is one."""
    p = load(name)
    prop = property_text(name)
    if prop is None:
        return p
    return instrument(p, parse_program(prop))
