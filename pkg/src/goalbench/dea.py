"""Frontier classification and production-possibility queries.

The technology is the variable-returns-to-scale hull of the observed DMUs
with free disposability. A DMU is extreme-efficient when no convex
combination of the others weakly dominates it; those units span every
efficient face, so downstream models only carry weights over them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .domain import (
    Dataset,
    GoalSet,
    ModelKind,
    ValidationError,
    ValidationIssue,
    MISSING_GOAL_ROW,
    VarKind,
    priced_variables,
)
from .simplex import CompiledProblem, LpBuilder, LpStatus

CLASSIFY_TOL = 1e-6    # min self-weight below 1 - tol means not extreme
EFFICIENCY_TOL = 1e-6  # max normalized slack above tol means dominated


class DmuStatus(Enum):
    EXTREME_EFFICIENT = "extreme-efficient"
    NOT_EXTREME = "not-extreme"


@dataclass(frozen=True, eq=False)
class Technology:
    dataset: Dataset
    representatives: tuple[str, ...]   # one id per distinct value row, dataset order
    aliases: dict[str, str]            # duplicate id -> representative id
    extreme: tuple[str, ...]           # extreme-efficient representatives
    status: dict[str, DmuStatus]       # per DMU (duplicates share their rep's status)
    min_self_weight: dict[str, float]  # classification LP optimum per representative

    @property
    def schema(self):
        return self.dataset.schema


def _dedup(dataset: Dataset) -> tuple[list[str], dict[str, str]]:
    reps: list[str] = []
    rep_of: dict[str, str] = {}
    seen: dict[bytes, str] = {}
    for i, dmu_id in enumerate(dataset.dmu_ids):
        key = dataset.values[i].tobytes()
        if key in seen:
            rep_of[dmu_id] = seen[key]
        else:
            seen[key] = dmu_id
            reps.append(dmu_id)
            rep_of[dmu_id] = dmu_id
    return reps, rep_of


def _hull_problem(dataset: Dataset, reps: list[str]) -> CompiledProblem:
    """Weights over reps; rhs is overridden per queried point."""
    schema = dataset.schema
    b = LpBuilder()
    for r in reps:
        b.var(f"weight:{r}")
    rows = {r: dataset.row(r) for r in reps}
    names = schema.names
    for k, name in enumerate(names):
        rel = "<=" if schema.variables[k].kind is VarKind.INPUT else ">="
        b.constraint({f"weight:{r}": float(rows[r][k]) for r in reps}, rel, 1.0)
    b.constraint({f"weight:{r}": 1.0 for r in reps}, "=", 1.0)
    b.objective({}, "min")
    return CompiledProblem(b.build())


def classify_extreme_efficient(dataset: Dataset) -> Technology:
    """Classify every DMU by the minimum weight it needs on itself.

    Exact duplicate rows are collapsed first (each duplicate would make the
    other look replaceable); the classification LP runs per representative:
    minimize that unit's own weight over hull members dominating it. An
    optimum of 1 (within CLASSIFY_TOL) marks the unit extreme-efficient.
    """
    reps, rep_of = _dedup(dataset)
    cp = _hull_problem(dataset, reps)
    nv = len(reps)
    extreme: list[str] = []
    scores: dict[str, float] = {}
    status: dict[str, DmuStatus] = {}
    for r in reps:
        c = np.zeros(nv)
        c[cp.index[f"weight:{r}"]] = 1.0
        b_vec = np.append(dataset.row(r).astype(float), 1.0)
        sol = cp.solve(c=c, b=b_vec)
        if sol.status is not LpStatus.OPTIMAL:
            raise RuntimeError(f"classification solve failed for {r!r}: {sol.status}")
        scores[r] = sol.objective
        if sol.objective >= 1.0 - CLASSIFY_TOL:
            extreme.append(r)
    for dmu_id in dataset.dmu_ids:
        rep = rep_of[dmu_id]
        status[dmu_id] = (
            DmuStatus.EXTREME_EFFICIENT if rep in set(extreme) else DmuStatus.NOT_EXTREME
        )
    return Technology(dataset, tuple(reps), rep_of, tuple(extreme), status, scores)


def pps_membership(tech: Technology, point: dict[str, float]) -> bool:
    """Is the point producible: some hull member uses no more input and
    yields no less output than it."""
    dataset = tech.dataset
    schema = dataset.schema
    cp = _hull_problem(dataset, list(tech.representatives))
    b_vec = np.array([float(point[name]) for name in schema.names] + [1.0])
    sol = cp.solve(b=b_vec)
    return sol.status is LpStatus.OPTIMAL


def goal_attainability(tech: Technology, dmu_id: str, goals: GoalSet) -> bool:
    """Can the DMU reach its goals with its unaddressed variables held at
    their actual levels."""
    if not goals.has(dmu_id):
        raise ValidationError(
            [ValidationIssue(MISSING_GOAL_ROW, f"no goal row for DMU {dmu_id!r}")]
        )
    point = dict(zip(tech.schema.names, (float(v) for v in tech.dataset.row(dmu_id))))
    point.update(goals.for_dmu(dmu_id))
    return pps_membership(tech, point)


def strong_efficiency_test(
    tech: Technology,
    point: dict[str, float],
    kind: ModelKind = ModelKind.NON_ORIENTED,
    anchor: dict[str, float] | None = None,
) -> bool:
    """Is the point on the strongly efficient frontier of its section.

    Maximizes total normalized slack over the extreme units: priced
    variables may be dominated directly, unpriced ones are held to the
    anchor's levels (defaults to the point itself). Zero optimum, within
    EFFICIENCY_TOL, means no feasible point dominates.
    """
    if anchor is None:
        anchor = point
    schema = tech.schema
    priced_in, priced_out = priced_variables(schema, kind)
    b = LpBuilder()
    for j in tech.extreme:
        b.var(f"weight:{j}")
    obj: dict[str, float] = {}
    for name in priced_in:
        b.var(f"slack:{name}")
        obj[f"slack:{name}"] = 1.0 / float(point[name])
    for name in priced_out:
        b.var(f"slack:{name}")
        obj[f"slack:{name}"] = 1.0 / float(point[name])
    cols = {name: tech.dataset.schema.names.index(name) for name in schema.names}
    rows = {j: tech.dataset.row(j) for j in tech.extreme}
    for name in schema.input_names:
        terms = {f"weight:{j}": float(rows[j][cols[name]]) for j in tech.extreme}
        if name in priced_in:
            terms[f"slack:{name}"] = 1.0
            b.constraint(terms, "=", float(point[name]))
        else:
            b.constraint(terms, "<=", float(anchor[name]))
    for name in schema.output_names:
        terms = {f"weight:{j}": float(rows[j][cols[name]]) for j in tech.extreme}
        if name in priced_out:
            terms[f"slack:{name}"] = -1.0
            b.constraint(terms, "=", float(point[name]))
        else:
            b.constraint(terms, ">=", float(anchor[name]))
    b.constraint({f"weight:{j}": 1.0 for j in tech.extreme}, "=", 1.0)
    b.objective(obj, "max")
    sol = CompiledProblem(b.build()).solve()
    if sol.status is not LpStatus.OPTIMAL:
        # the point is not even producible by the extreme hull section
        return False
    return sol.objective <= EFFICIENCY_TOL
