"""Dense two-phase simplex with a compiled kernel and a numpy fallback."""

from .core import (
    BLAND_AFTER,
    DUAL_TOL,
    FEAS_TOL,
    PIVOT_TOL,
    CompiledProblem,
    LinearProgram,
    LpBuilder,
    LpConstraint,
    LpObjective,
    LpSolution,
    LpStatus,
    LpVariable,
    NumericalBreakdown,
    get_backend,
    set_backend,
    set_certificate_checks,
    solve_lp,
)

__all__ = [
    "BLAND_AFTER",
    "DUAL_TOL",
    "FEAS_TOL",
    "PIVOT_TOL",
    "CompiledProblem",
    "LinearProgram",
    "LpBuilder",
    "LpConstraint",
    "LpObjective",
    "LpSolution",
    "LpStatus",
    "LpVariable",
    "NumericalBreakdown",
    "get_backend",
    "set_backend",
    "set_certificate_checks",
    "solve_lp",
]
