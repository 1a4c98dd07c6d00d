from horndim.solver.algorithms import lift, restrict, solve_inc, solve_partition, subst
from horndim.solver.oracles import (
    BOUNDED, EXTERNAL, KINDS, POLYHEDRA, PORTFOLIO, SAFE, SOLVER_ENV, UNKNOWN, UNSAFE,
    ContractViolation, OracleConfig, OracleError, SafeResult, check_contract, safe,
    safe_bounded, safe_external, safe_polyhedra, safe_portfolio,
)

__all__ = [
    "BOUNDED", "EXTERNAL", "KINDS", "POLYHEDRA", "PORTFOLIO", "SAFE", "SOLVER_ENV", "UNKNOWN",
    "UNSAFE", "ContractViolation", "OracleConfig", "OracleError", "SafeResult", "check_contract",
    "lift", "restrict", "safe", "safe_bounded", "safe_external", "safe_polyhedra",
    "safe_portfolio", "solve_inc", "solve_partition", "subst",
]
