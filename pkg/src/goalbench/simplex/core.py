"""Bounded-variable two-phase primal simplex over a dense tableau.

The hot pivot loop lives in a kernel selected at import time: the compiled
extension (_speedups) when available, else the numpy twin (_speedups_py).
Both perform identical elementwise arithmetic, so solves are bit-identical
across backends. GOALBENCH_BACKEND=python|compiled forces a choice.

Pricing is largest-coefficient with first-index tie breaks, falling back to
Bland's rule for the remainder of a solve once BLAND_AFTER degenerate steps
accumulate, which guarantees termination. Identical inputs pivot
identically; there is no randomization anywhere.

Dual values and reduced costs are read off the final tableau and reported
in min-form (maximization is solved as negated minimization). For
infeasible programs the phase-1 duals are returned as a Farkas certificate.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from enum import Enum, unique

import numpy as np

FEAS_TOL = 1e-7    # feasibility residuals, phase-1 acceptance
DUAL_TOL = 1e-7    # optimality threshold on reduced costs
PIVOT_TOL = 1e-9   # smallest usable pivot; degenerate-step size
BLAND_AFTER = 100  # degenerate steps tolerated before Bland's rule kicks in

_INF = math.inf

# variable status / return codes shared with the kernels
_AT_LOWER, _AT_UPPER, _BASIC, _FREE = 0, 1, 2, 3
_OPTIMAL, _UNBOUNDED, _ITER_LIMIT = 0, 1, 2

_RELS = ("<=", "=", ">=")


class NumericalBreakdown(Exception):
    """Pivoting could not reach a clean optimum within fixed tolerances.

    Signals ill-conditioned data; callers may rescale columns and retry.
    """


@unique
class LpStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


# ---------------------------------------------------------------------------
# kernel selection

def _available_kernels() -> dict:
    from . import _speedups_py

    kernels = {"python": _speedups_py}
    try:
        from . import _speedups

        kernels["compiled"] = _speedups
    except ImportError:
        pass
    return kernels


_KERNELS = _available_kernels()


def _default_backend() -> str:
    env = os.environ.get("GOALBENCH_BACKEND")
    if env:
        if env not in ("python", "compiled"):
            raise ValueError(f"GOALBENCH_BACKEND must be 'python' or 'compiled', got {env!r}")
        if env not in _KERNELS:
            raise ImportError("GOALBENCH_BACKEND=compiled but the extension is not built")
        return env
    return "compiled" if "compiled" in _KERNELS else "python"


_backend_name = _default_backend()
_kernel = _KERNELS[_backend_name]


def get_backend() -> str:
    return _backend_name


def set_backend(name: str) -> None:
    global _backend_name, _kernel
    if name not in _KERNELS:
        raise ValueError(f"backend {name!r} not available (have {sorted(_KERNELS)})")
    _backend_name = name
    _kernel = _KERNELS[name]


_check_certificates = False


def set_certificate_checks(enabled: bool) -> None:
    """Verify a weak-duality certificate after every solve (test hook)."""
    global _check_certificates
    _check_certificates = bool(enabled)


# ---------------------------------------------------------------------------
# problem model

@dataclass(frozen=True)
class LpVariable:
    id: str
    lb: float = 0.0
    ub: float = _INF


@dataclass(frozen=True, eq=False)
class LpConstraint:
    coeffs: np.ndarray  # dense, aligned with variable order
    rel: str            # one of "<=", "=", ">="
    rhs: float


@dataclass(frozen=True, eq=False)
class LpObjective:
    coeffs: np.ndarray
    sense: str = "min"  # "min" or "max"


@dataclass(frozen=True, eq=False)
class LinearProgram:
    variables: tuple[LpVariable, ...]
    constraints: tuple[LpConstraint, ...]
    objective: LpObjective


@dataclass(eq=False)
class LpSolution:
    status: LpStatus
    objective: float                 # in the problem's own sense; nan if not optimal
    values: dict[str, float]
    x: np.ndarray | None = None      # structural values, variable order
    duals: np.ndarray | None = None  # per constraint, min-form convention
    reduced_costs: np.ndarray | None = None
    iterations: int = 0
    farkas: np.ndarray | None = None  # phase-1 duals proving infeasibility

    def value(self, var_id: str) -> float:
        return self.values[var_id]


class LpBuilder:
    """Assembles a LinearProgram from sparse name-keyed terms."""

    def __init__(self) -> None:
        self._vars: list[LpVariable] = []
        self._index: dict[str, int] = {}
        self._rows: list[tuple[dict[str, float], str, float]] = []
        self._obj: dict[str, float] = {}
        self._sense = "min"

    def var(self, var_id: str, lb: float = 0.0, ub: float = _INF) -> str:
        if var_id in self._index:
            raise ValueError(f"duplicate variable id {var_id!r}")
        self._index[var_id] = len(self._vars)
        self._vars.append(LpVariable(var_id, float(lb), float(ub)))
        return var_id

    def constraint(self, terms: dict[str, float], rel: str, rhs: float) -> None:
        if rel not in _RELS:
            raise ValueError(f"relation must be one of {_RELS}, got {rel!r}")
        for k in terms:
            if k not in self._index:
                raise KeyError(f"unknown variable {k!r} in constraint")
        self._rows.append((dict(terms), rel, float(rhs)))

    def objective(self, terms: dict[str, float], sense: str = "min") -> None:
        if sense not in ("min", "max"):
            raise ValueError(f"sense must be 'min' or 'max', got {sense!r}")
        for k in terms:
            if k not in self._index:
                raise KeyError(f"unknown variable {k!r} in objective")
        self._obj = dict(terms)
        self._sense = sense

    def build(self) -> LinearProgram:
        nv = len(self._vars)
        cons = []
        for terms, rel, rhs in self._rows:
            row = np.zeros(nv)
            for k, v in terms.items():
                row[self._index[k]] = v
            cons.append(LpConstraint(row, rel, rhs))
        c = np.zeros(nv)
        for k, v in self._obj.items():
            c[self._index[k]] = v
        return LinearProgram(tuple(self._vars), tuple(cons), LpObjective(c, self._sense))


# ---------------------------------------------------------------------------
# standardized form + solver

class CompiledProblem:
    """Pre-standardized LP, reusable across solves with array overrides.

    Columns are laid out [structural | slack | artificial]. Overrides (c,
    b, lo, hi) replace the corresponding base arrays for one solve, which
    is how branch-and-bound fixes variables to zero without rebuilding.
    """

    def __init__(self, problem: LinearProgram) -> None:
        self.problem = problem
        nv = len(problem.variables)
        m = len(problem.constraints)
        self.nv = nv
        self.m = m
        self.names = tuple(v.id for v in problem.variables)
        self.index = {v.id: i for i, v in enumerate(problem.variables)}
        self.base_lo = np.array([v.lb for v in problem.variables], dtype=float)
        self.base_hi = np.array([v.ub for v in problem.variables], dtype=float)
        if np.any(self.base_lo > self.base_hi):
            raise ValueError("variable with lower bound above upper bound")
        self.base_c = np.asarray(problem.objective.coeffs, dtype=float).copy()
        if self.base_c.shape != (nv,):
            raise ValueError("objective length does not match variable count")
        self.min_sign = 1.0 if problem.objective.sense == "min" else -1.0
        self.base_b = np.array([c.rhs for c in problem.constraints], dtype=float)
        self.rels = tuple(c.rel for c in problem.constraints)

        slack_rows = [i for i, c in enumerate(problem.constraints) if c.rel != "="]
        n_slack = len(slack_rows)
        self.art_start = nv + n_slack
        self.ncols = self.art_start + m
        A_fs = np.zeros((m, self.art_start))
        for i, c in enumerate(problem.constraints):
            row = np.asarray(c.coeffs, dtype=float)
            if row.shape != (nv,):
                raise ValueError("constraint row length does not match variable count")
            A_fs[i, :nv] = row
        for k, i in enumerate(slack_rows):
            A_fs[i, nv + k] = 1.0 if problem.constraints[i].rel == "<=" else -1.0
        self.A_fs = A_fs

    def solve(self, *, lo=None, hi=None, c=None, b=None, max_iter=None) -> LpSolution:
        nv, m, ncols, art = self.nv, self.m, self.ncols, self.art_start
        lo_s = np.asarray(lo, dtype=float) if lo is not None else self.base_lo
        hi_s = np.asarray(hi, dtype=float) if hi is not None else self.base_hi
        c_user = np.asarray(c, dtype=float) if c is not None else self.base_c
        b_vec = np.asarray(b, dtype=float) if b is not None else self.base_b
        c_min = self.min_sign * c_user

        lo_full = np.zeros(ncols)
        hi_full = np.full(ncols, _INF)
        lo_full[:nv] = lo_s
        hi_full[:nv] = hi_s

        vstat = np.full(ncols, _AT_LOWER, dtype=np.int8)
        ns = slice(0, art)  # structural + slack
        vstat[ns] = np.where(
            np.isfinite(lo_full[ns]),
            _AT_LOWER,
            np.where(np.isfinite(hi_full[ns]), _AT_UPPER, _FREE),
        ).astype(np.int8)
        vstat[art:] = _BASIC

        x0 = np.where(
            vstat[ns] == _AT_LOWER,
            lo_full[ns],
            np.where(vstat[ns] == _AT_UPPER, hi_full[ns], 0.0),
        )
        r = b_vec - np.sum(self.A_fs * x0[None, :], axis=1)
        s = np.where(r >= 0.0, 1.0, -1.0)

        T = np.empty((m, ncols))
        T[:, :art] = s[:, None] * self.A_fs
        T[:, art:] = np.eye(m)
        xB = s * r
        basis = np.arange(art, ncols, dtype=np.int64)

        enterable = np.zeros(ncols, dtype=np.uint8)
        enterable[ns] = (hi_full[ns] - lo_full[ns]) > 0.0

        cost1 = np.zeros(ncols)
        cost1[art:] = 1.0
        cost1 -= np.sum(T, axis=0)
        cost2 = np.zeros(ncols)
        cost2[:nv] = c_min

        if max_iter is None:
            max_iter = 5000 + 50 * (m + ncols)

        code, it1, _ = _kernel.run_phase(
            T, xB, cost1, cost2, basis, vstat, lo_full, hi_full, enterable,
            DUAL_TOL, PIVOT_TOL, BLAND_AFTER, max_iter,
        )
        if code != _OPTIMAL:
            raise NumericalBreakdown(f"phase 1 ended with kernel code {code} after {it1} pivots")

        art_rows = [i for i in range(m) if basis[i] >= art]
        obj1 = math.fsum(float(xB[i]) for i in art_rows)
        if obj1 > FEAS_TOL:
            y1 = s * (1.0 - cost1[art:])
            sol = LpSolution(LpStatus.INFEASIBLE, math.nan, {}, iterations=it1, farkas=y1)
            if _check_certificates:
                self._verify_farkas(y1, lo_full, hi_full, b_vec, obj1)
            return sol

        # drive leftover artificials out of the basis (degenerate pivots);
        # rows with no usable pivot are redundant and keep a pinned artificial
        for p in art_rows:
            if basis[p] < art:
                continue
            row = np.abs(T[p, :art])
            row = np.where(vstat[:art] != _BASIC, row, -1.0)
            q = int(np.argmax(row))
            if row[q] > PIVOT_TOL:
                _force_pivot(T, xB, cost1, cost2, basis, vstat, lo_full, hi_full, p, q)
            else:
                hi_full[basis[p]] = 0.0

        code, it2, _ = _kernel.run_phase(
            T, xB, cost2, cost1, basis, vstat, lo_full, hi_full, enterable,
            DUAL_TOL, PIVOT_TOL, BLAND_AFTER, max_iter,
        )
        iters = it1 + it2
        if code == _ITER_LIMIT:
            raise NumericalBreakdown(f"iteration limit {max_iter} hit in phase 2")
        if code == _UNBOUNDED:
            obj = -_INF if self.min_sign > 0 else _INF
            return LpSolution(LpStatus.UNBOUNDED, obj, {}, iterations=iters)

        x_full = np.where(
            vstat == _AT_LOWER, lo_full, np.where(vstat == _AT_UPPER, hi_full, 0.0)
        )
        x_full[basis] = xB
        xs = x_full[:nv]

        self._residual_check(xs, lo_s, hi_s, b_vec)

        objective = math.fsum(float(c_user[j]) * float(xs[j]) for j in range(nv) if c_user[j] != 0.0)
        y = -s * cost2[art:]
        reduced = cost2[:nv].copy()
        values = dict(zip(self.names, (float(v) for v in xs)))
        sol = LpSolution(
            LpStatus.OPTIMAL, objective, values, x=xs.copy(),
            duals=y, reduced_costs=reduced, iterations=iters,
        )
        if _check_certificates:
            self._verify_optimal(sol, c_min, lo_full, hi_full, b_vec)
        return sol

    # -- post-solve validation ------------------------------------------------

    def _residual_check(self, xs: np.ndarray, lo_s, hi_s, b_vec) -> None:
        lhs = np.sum(self.A_fs[:, : self.nv] * xs[None, :], axis=1)
        worst = 0.0
        for i, rel in enumerate(self.rels):
            if rel == "<=":
                v = lhs[i] - b_vec[i]
            elif rel == ">=":
                v = b_vec[i] - lhs[i]
            else:
                v = abs(lhs[i] - b_vec[i])
            if v > worst:
                worst = float(v)
        if worst > FEAS_TOL:
            raise NumericalBreakdown(f"constraint residual {worst:.3e} exceeds {FEAS_TOL:.0e}")
        bound_viol = np.maximum(lo_s - xs, xs - hi_s)
        if bound_viol.size and float(bound_viol.max()) > FEAS_TOL:
            raise NumericalBreakdown(
                f"variable bound violated by {float(bound_viol.max()):.3e}"
            )

    def _dual_bound(self, y: np.ndarray, c_min_full, lo_full, hi_full, b_vec):
        """Weak-duality bound y'b + sum_j phi(d_j) and the sign-condition violation."""
        d = c_min_full - np.sum(y[:, None] * self.A_fs, axis=0)
        viol = 0.0
        contrib = 0.0
        for j in range(self.art_start):
            dj = float(d[j])
            ljf = math.isfinite(lo_full[j])
            ujf = math.isfinite(hi_full[j])
            if dj > DUAL_TOL and not ljf:
                viol = max(viol, dj)
            elif dj < -DUAL_TOL and not ujf:
                viol = max(viol, -dj)
            if dj > DUAL_TOL:
                contrib += dj * (lo_full[j] if ljf else 0.0)
            elif dj < -DUAL_TOL:
                contrib += dj * (hi_full[j] if ujf else 0.0)
        bound = math.fsum(float(y[i]) * float(b_vec[i]) for i in range(self.m)) + contrib
        return bound, viol

    def _verify_optimal(self, sol: LpSolution, c_min, lo_full, hi_full, b_vec) -> None:
        c_min_full = np.zeros(self.art_start)
        c_min_full[: self.nv] = c_min
        bound, viol = self._dual_bound(sol.duals, c_min_full, lo_full, hi_full, b_vec)
        obj_min = self.min_sign * sol.objective
        scale = 1.0 + abs(obj_min)
        if viol > 1e-6 * scale or abs(bound - obj_min) > 1e-6 * scale:
            raise AssertionError(
                f"weak-duality certificate failed: bound={bound!r} obj={obj_min!r} viol={viol!r}"
            )

    def _verify_farkas(self, y1, lo_full, hi_full, b_vec, obj1) -> None:
        # phase-1 dual: structural/slack costs are zero; bound must stay positive
        c0 = np.zeros(self.art_start)
        bound, viol = self._dual_bound(y1, c0, lo_full, hi_full, b_vec)
        scale = 1.0 + abs(obj1)
        if viol > 1e-6 * scale or bound < FEAS_TOL / 2.0:
            raise AssertionError(
                f"infeasibility certificate failed: bound={bound!r} viol={viol!r}"
            )


def _force_pivot(T, xB, cost, cost2, basis, vstat, lo_full, hi_full, p, q) -> None:
    """Degenerate pivot bringing nonbasic q into row p at zero step."""
    if vstat[q] == _AT_LOWER:
        enter_val = float(lo_full[q])
    elif vstat[q] == _AT_UPPER:
        enter_val = float(hi_full[q])
    else:
        enter_val = 0.0
    piv = float(T[p, q])
    T[p, :] /= piv
    f = T[:, q].copy()
    f[p] = 0.0
    T -= f[:, None] * T[p, None, :]
    fc = float(cost[q])
    cost -= fc * T[p, :]
    fc2 = float(cost2[q])
    cost2 -= fc2 * T[p, :]
    vstat[basis[p]] = _AT_LOWER
    xB[p] = enter_val
    basis[p] = q
    vstat[q] = _BASIC


def solve_lp(problem: LinearProgram, *, max_iter: int | None = None) -> LpSolution:
    """One-shot solve; see CompiledProblem for repeated solves."""
    return CompiledProblem(problem).solve(max_iter=max_iter)
