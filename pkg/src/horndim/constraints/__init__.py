"""Exact linear arithmetic over the rationals (and integers)."""

from horndim.constraints.linear import (
    EQ, FALSE, LE, LT, TRUE, ConstraintConj, LinConstraint, conj, lin,
)
from horndim.constraints.ops import (
    INTEGER, RATIONAL, entails, entails_all, equivalent, hull, is_empty, is_sat,
    minimize, project, remove_redundant, widen,
)
from horndim.constraints.simplex import BudgetExhausted

Polyhedron = ConstraintConj

__all__ = [
    "EQ", "LE", "LT", "TRUE", "FALSE", "LinConstraint", "ConstraintConj",
    "Polyhedron", "lin", "conj", "RATIONAL", "INTEGER", "is_sat", "entails",
    "entails_all", "equivalent", "project", "hull", "widen", "minimize",
    "is_empty", "remove_redundant", "BudgetExhausted",
]
