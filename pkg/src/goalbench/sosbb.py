"""SOS1 complementarity by LP-based branch and bound.

A pair {a, b} means at most one of the two nonnegative variables may be
positive. Branching fixes one member's upper bound to zero, so every node
is an ordinary LP relaxation and its objective bounds all completions.
The search is depth-first with best-incumbent pruning and is fully
deterministic: pairs are examined in list order, the first violated pair
is branched, the child fixing the second member is explored before the
child fixing the first, and the first incumbent is kept on objective ties.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .simplex import CompiledProblem, LinearProgram, LpStatus, NumericalBreakdown

COMP_TOL = 1e-7           # complementarity residual treated as satisfied
PRUNE_TIE_TOL = 1e-9      # bound within this of the incumbent cannot win
DEFAULT_NODE_LIMIT = 1_000_000

SosPairList = "list[tuple[str, str]]"


class NodeLimitExceeded(Exception):
    """Branch-and-bound explored more nodes than the configured cap."""


@dataclass(eq=False)
class BranchSolution:
    status: LpStatus
    objective: float
    values: dict[str, float]
    x: np.ndarray | None
    pair_residuals: tuple[float, ...]  # min of the two member values, per pair
    node_count: int
    fixed_to_zero: tuple[str, ...]     # upper-bound fixings active at the incumbent

    def value(self, var_id: str) -> float:
        return self.values[var_id]


def solve_sos1(problem, pairs, *, node_limit: int = DEFAULT_NODE_LIMIT) -> BranchSolution:
    """Globally minimize (or maximize) over all complementarity-feasible points.

    problem: LinearProgram or a prebuilt CompiledProblem.
    pairs: iterable of (id_a, id_b); both variables need lower bound 0.
    """
    cp = problem if isinstance(problem, CompiledProblem) else CompiledProblem(problem)
    idx: list[tuple[int, int]] = []
    for a, b in pairs:
        if a == b:
            raise ValueError(f"pair members must be distinct, got {a!r} twice")
        ia, ib = cp.index[a], cp.index[b]
        if cp.base_lo[ia] != 0.0 or cp.base_lo[ib] != 0.0:
            raise ValueError(f"pair ({a!r}, {b!r}) members must have lower bound 0")
        idx.append((ia, ib))

    min_sign = cp.min_sign
    base_hi = cp.base_hi
    incumbent = None
    inc_min = math.inf
    inc_fixed: tuple[int, ...] = ()
    nodes = 0
    stack: list[tuple[int, ...]] = [()]

    while stack:
        fixed = stack.pop()
        if nodes >= node_limit:
            raise NodeLimitExceeded(f"node limit {node_limit} reached")
        nodes += 1
        if fixed:
            hi = base_hi.copy()
            hi[list(fixed)] = 0.0
            sol = cp.solve(hi=hi)
        else:
            sol = cp.solve()
        if sol.status is LpStatus.INFEASIBLE:
            continue
        if sol.status is LpStatus.UNBOUNDED:
            if not fixed:
                return BranchSolution(
                    LpStatus.UNBOUNDED, sol.objective, {}, None, (), nodes, ()
                )
            # a child of a bounded relaxation cannot be unbounded
            raise NumericalBreakdown("unbounded node below a bounded root")
        obj_min = min_sign * sol.objective
        if obj_min >= inc_min - PRUNE_TIE_TOL:
            continue
        branch = -1
        x = sol.x
        for k, (ia, ib) in enumerate(idx):
            va = x[ia]
            vb = x[ib]
            if (va if va < vb else vb) > COMP_TOL:
                branch = k
                break
        if branch < 0:
            incumbent = sol
            inc_min = obj_min
            inc_fixed = fixed
            continue
        ia, ib = idx[branch]
        stack.append(fixed + (ia,))  # popped second
        stack.append(fixed + (ib,))  # popped first

    if incumbent is None:
        return BranchSolution(LpStatus.INFEASIBLE, math.nan, {}, None, (), nodes, ())
    residuals = tuple(
        float(min(incumbent.x[ia], incumbent.x[ib])) for ia, ib in idx
    )
    fixed_ids = tuple(cp.names[j] for j in inc_fixed)
    return BranchSolution(
        LpStatus.OPTIMAL,
        incumbent.objective,
        incumbent.values,
        incumbent.x,
        residuals,
        nodes,
        fixed_ids,
    )
