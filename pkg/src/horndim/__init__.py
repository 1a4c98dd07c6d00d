"""Verification of constrained Horn clauses by decomposition on tree dimension."""

from horndim.chc import (
    ArityError, Atom, Clause, ConstrainedFact, Interpretation, Program, ProgramError,
    is_goal_pred, model_check,
)
from horndim.syntax import (
    ParseError, parse_constraint, parse_interpretation, parse_program, print_interpretation,
    print_program,
)

__all__ = [
    "ArityError", "Atom", "Clause", "ConstrainedFact", "Interpretation", "ParseError",
    "Program", "ProgramError", "is_goal_pred", "model_check", "parse_constraint",
    "parse_interpretation", "parse_program", "print_interpretation", "print_program",
]
