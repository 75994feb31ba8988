"""Goal-adjusted closest-target benchmark models.

For a DMU with goal levels, the model picks a point on the strongly
efficient frontier minimizing

    alpha * d_actual + (1 - alpha) * d_goal

where d_actual sums the priced deviations from the DMU's actual levels and
d_goal the priced deviations from its goals, each normalized by the actual
level. Frontier membership is enforced by supporting-hyperplane rows over
the extreme units with weight/gap complementarity (and price/slack
complementarity for unpriced variables), solved as an SOS1 program.

At alpha exactly 0 or 1 the omitted distance is tie-broken by a second
stage constrained to the first stage's optimum (plus a small epsilon), so
endpoint solutions are canonical.

Three builders exist: dedicated non-oriented and oriented forms for
instances without non-controllable variables, and a general form that
also handles non-controllables. general=True forces the general form; its
optima must agree with the dedicated forms, which the tests exploit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dea import Technology
from .domain import (
    AlphaGrid,
    Dataset,
    GoalSet,
    MISSING_GOAL_ROW,
    ModelKind,
    ValidationError,
    ValidationIssue,
    derive_model_kind,
    priced_variables,
)
from .simplex import LinearProgram, LpBuilder, LpConstraint, LpObjective, LpStatus, NumericalBreakdown
from .sosbb import DEFAULT_NODE_LIMIT, solve_sos1

STAGE2_EPS = 1e-7   # slack on the held first-stage optimum
SUPPORT_TOL = 1e-7  # weights above this enter the reference set

_FREE = (-math.inf, math.inf)


@dataclass(eq=False)
class BuiltModel:
    lp: LinearProgram
    pairs: list[tuple[str, str]]
    lam_ids: tuple[tuple[str, str], ...]  # (dmu id, weight variable id), extreme order
    actual_terms: dict[str, float]        # d_actual expression, unit weights
    goal_terms: dict[str, float]          # d_goal expression, unit weights
    kind: ModelKind
    alpha: float
    dmu_id: str


@dataclass(frozen=True, eq=False)
class DeviationBundle:
    """Signed deviations; positive means movement in the improving sense."""

    input_dev: dict[str, float]        # actual - target, every input
    output_dev: dict[str, float]       # target - actual, every output
    input_goal_dev: dict[str, float]   # goal - target, goal-covered inputs
    output_goal_dev: dict[str, float]  # target - goal, goal-covered outputs


@dataclass(eq=False)
class BenchmarkResult:
    dmu_id: str
    alpha: float
    kind: ModelKind
    targets: dict[str, float]     # frontier levels for every schema variable
    reference: dict[str, float]   # weights over extreme units above SUPPORT_TOL
    deviations: DeviationBundle
    d_actual: float
    d_goal: float
    objective: float              # alpha*d_actual + (1-alpha)*d_goal
    stage2_applied: bool
    node_count: int


def _columns(dataset: Dataset, names) -> dict[str, int]:
    order = dataset.schema.names
    return {n: order.index(n) for n in names}


class _Ctx:
    """Shared arrays for one (dataset, extreme set, dmu, goals) build."""

    def __init__(self, dataset: Dataset, extreme, dmu_id: str, goal_map: dict[str, float]):
        self.schema = dataset.schema
        self.E = tuple(extreme)
        self.dmu_id = dmu_id
        self.cols = _columns(dataset, self.schema.names)
        self.rows = {j: dataset.row(j) for j in self.E}
        self.x0 = dataset.row(dmu_id)
        self.goal_map = goal_map

    def data(self, j: str, name: str) -> float:
        return float(self.rows[j][self.cols[name]])

    def actual(self, name: str) -> float:
        return float(self.x0[self.cols[name]])

    def goal(self, name: str) -> float:
        return float(self.goal_map[name])


def _weight_terms(ctx: _Ctx, name: str) -> dict[str, float]:
    return {f"weight:{j}": ctx.data(j, name) for j in ctx.E}


def _hyperplane_rows(b: LpBuilder, ctx: _Ctx) -> None:
    for j in ctx.E:
        terms: dict[str, float] = {}
        for name in ctx.schema.input_names:
            terms[f"price_in:{name}"] = -ctx.data(j, name)
        for name in ctx.schema.output_names:
            terms[f"price_out:{name}"] = ctx.data(j, name)
        terms["intercept"] = 1.0
        terms[f"gap:{j}"] = 1.0
        b.constraint(terms, "=", 0.0)


def _finish(b: LpBuilder, ctx: _Ctx, alpha: float, actual_terms, goal_terms,
            pairs, kind: ModelKind) -> BuiltModel:
    obj: dict[str, float] = {}
    for k, w in actual_terms.items():
        obj[k] = alpha * w
    for k, w in goal_terms.items():
        obj[k] = obj.get(k, 0.0) + (1.0 - alpha) * w
    b.objective(obj, "min")
    lam_ids = tuple((j, f"weight:{j}") for j in ctx.E)
    return BuiltModel(b.build(), pairs, lam_ids, actual_terms, goal_terms,
                      kind, alpha, ctx.dmu_id)


def _build_non_oriented(ctx: _Ctx, alpha: float) -> BuiltModel:
    """Dedicated form: goals on every variable, all controllable."""
    schema = ctx.schema
    ins, outs = schema.input_names, schema.output_names
    b = LpBuilder()
    for j in ctx.E:
        b.var(f"weight:{j}")
    for n in ins:
        b.var(f"in_dev_p:{n}")
        b.var(f"in_dev_m:{n}")
    for n in outs:
        b.var(f"out_dev_p:{n}")
        b.var(f"out_dev_m:{n}")
    for n in ins:
        b.var(f"in_gdev_p:{n}")
        b.var(f"in_gdev_m:{n}")
    for n in outs:
        b.var(f"out_gdev_p:{n}")
        b.var(f"out_gdev_m:{n}")
    for j in ctx.E:
        b.var(f"gap:{j}")
    for n in ins:
        b.var(f"price_in:{n}", lb=1.0)
    for n in outs:
        b.var(f"price_out:{n}", lb=1.0)
    b.var("intercept", *_FREE)

    for n in ins:
        t = _weight_terms(ctx, n)
        t[f"in_dev_p:{n}"] = 1.0
        t[f"in_dev_m:{n}"] = -1.0
        b.constraint(t, "=", ctx.actual(n))
    for n in outs:
        t = _weight_terms(ctx, n)
        t[f"out_dev_p:{n}"] = -1.0
        t[f"out_dev_m:{n}"] = 1.0
        b.constraint(t, "=", ctx.actual(n))
    for n in ins:
        t = _weight_terms(ctx, n)
        t[f"in_gdev_p:{n}"] = 1.0
        t[f"in_gdev_m:{n}"] = -1.0
        b.constraint(t, "=", ctx.goal(n))
    for n in outs:
        t = _weight_terms(ctx, n)
        t[f"out_gdev_p:{n}"] = -1.0
        t[f"out_gdev_m:{n}"] = 1.0
        b.constraint(t, "=", ctx.goal(n))
    b.constraint({f"weight:{j}": 1.0 for j in ctx.E}, "=", 1.0)
    _hyperplane_rows(b, ctx)

    actual_terms: dict[str, float] = {}
    goal_terms: dict[str, float] = {}
    for n in ins:
        w = 1.0 / ctx.actual(n)
        actual_terms[f"in_dev_p:{n}"] = w
        actual_terms[f"in_dev_m:{n}"] = w
        goal_terms[f"in_gdev_p:{n}"] = w
        goal_terms[f"in_gdev_m:{n}"] = w
    for n in outs:
        w = 1.0 / ctx.actual(n)
        actual_terms[f"out_dev_p:{n}"] = w
        actual_terms[f"out_dev_m:{n}"] = w
        goal_terms[f"out_gdev_p:{n}"] = w
        goal_terms[f"out_gdev_m:{n}"] = w
    pairs = [(f"weight:{j}", f"gap:{j}") for j in ctx.E]
    return _finish(b, ctx, alpha, actual_terms, goal_terms, pairs, ModelKind.NON_ORIENTED)


def _build_oriented(ctx: _Ctx, alpha: float, kind: ModelKind) -> BuiltModel:
    """Dedicated oriented form, no non-controllable variables.

    The unpriced side may only improve (inputs shrink / outputs grow) and
    trades price/slack complementarity for deviation terms.
    """
    schema = ctx.schema
    if kind is ModelKind.OUTPUT_ORIENTED:
        priced, unpriced = schema.output_names, schema.input_names
    else:
        priced, unpriced = schema.input_names, schema.output_names
    out_oriented = kind is ModelKind.OUTPUT_ORIENTED
    b = LpBuilder()
    for j in ctx.E:
        b.var(f"weight:{j}")
    for n in unpriced:
        b.var(f"slack:{n}")
    for n in priced:
        b.var(f"dev_p:{n}")
        b.var(f"dev_m:{n}")
    for n in priced:
        b.var(f"gdev_p:{n}")
        b.var(f"gdev_m:{n}")
    for j in ctx.E:
        b.var(f"gap:{j}")
    for n in schema.input_names:
        b.var(f"price_in:{n}", lb=0.0 if out_oriented else 1.0)
    for n in schema.output_names:
        b.var(f"price_out:{n}", lb=1.0 if out_oriented else 0.0)
    b.var("intercept", *_FREE)

    sgn = -1.0 if out_oriented else 1.0  # slack sign in balance rows
    for n in schema.input_names:
        t = _weight_terms(ctx, n)
        if n in priced:
            t[f"dev_p:{n}"] = 1.0
            t[f"dev_m:{n}"] = -1.0
        else:
            t[f"slack:{n}"] = 1.0
        b.constraint(t, "=", ctx.actual(n))
    for n in schema.output_names:
        t = _weight_terms(ctx, n)
        if n in priced:
            t[f"dev_p:{n}"] = -1.0
            t[f"dev_m:{n}"] = 1.0
        else:
            t[f"slack:{n}"] = -1.0
        b.constraint(t, "=", ctx.actual(n))
    for n in priced:
        t = _weight_terms(ctx, n)
        if out_oriented:
            t[f"gdev_p:{n}"] = -1.0
            t[f"gdev_m:{n}"] = 1.0
        else:
            t[f"gdev_p:{n}"] = 1.0
            t[f"gdev_m:{n}"] = -1.0
        b.constraint(t, "=", ctx.goal(n))
    b.constraint({f"weight:{j}": 1.0 for j in ctx.E}, "=", 1.0)
    _hyperplane_rows(b, ctx)

    actual_terms: dict[str, float] = {}
    goal_terms: dict[str, float] = {}
    for n in priced:
        w = 1.0 / ctx.actual(n)
        actual_terms[f"dev_p:{n}"] = w
        actual_terms[f"dev_m:{n}"] = w
        goal_terms[f"gdev_p:{n}"] = w
        goal_terms[f"gdev_m:{n}"] = w
    pairs = [(f"weight:{j}", f"gap:{j}") for j in ctx.E]
    price_prefix = "price_in" if out_oriented else "price_out"
    for n in unpriced:
        pairs.append((f"{price_prefix}:{n}", f"slack:{n}"))
    return _finish(b, ctx, alpha, actual_terms, goal_terms, pairs, kind)


def _build_general(ctx: _Ctx, alpha: float, kind: ModelKind) -> BuiltModel:
    """General form: any kind, non-controllable variables allowed."""
    schema = ctx.schema
    priced_in, priced_out = priced_variables(schema, kind)
    unpriced_in = tuple(n for n in schema.input_names if n not in priced_in)
    unpriced_out = tuple(n for n in schema.output_names if n not in priced_out)
    b = LpBuilder()
    for j in ctx.E:
        b.var(f"weight:{j}")
    for n in priced_in:
        b.var(f"in_dev_p:{n}")
        b.var(f"in_dev_m:{n}")
    for n in unpriced_in:
        b.var(f"in_slack:{n}")
    for n in priced_out:
        b.var(f"out_dev_p:{n}")
        b.var(f"out_dev_m:{n}")
    for n in unpriced_out:
        b.var(f"out_slack:{n}")
    for n in priced_in:
        b.var(f"in_gdev_p:{n}")
        b.var(f"in_gdev_m:{n}")
    for n in priced_out:
        b.var(f"out_gdev_p:{n}")
        b.var(f"out_gdev_m:{n}")
    for j in ctx.E:
        b.var(f"gap:{j}")
    for n in schema.input_names:
        b.var(f"price_in:{n}", lb=1.0 if n in priced_in else 0.0)
    for n in schema.output_names:
        b.var(f"price_out:{n}", lb=1.0 if n in priced_out else 0.0)
    b.var("intercept", *_FREE)

    for n in schema.input_names:
        t = _weight_terms(ctx, n)
        if n in priced_in:
            t[f"in_dev_p:{n}"] = 1.0
            t[f"in_dev_m:{n}"] = -1.0
        else:
            t[f"in_slack:{n}"] = 1.0
        b.constraint(t, "=", ctx.actual(n))
    for n in schema.output_names:
        t = _weight_terms(ctx, n)
        if n in priced_out:
            t[f"out_dev_p:{n}"] = -1.0
            t[f"out_dev_m:{n}"] = 1.0
        else:
            t[f"out_slack:{n}"] = -1.0
        b.constraint(t, "=", ctx.actual(n))
    for n in priced_in:
        t = _weight_terms(ctx, n)
        t[f"in_gdev_p:{n}"] = 1.0
        t[f"in_gdev_m:{n}"] = -1.0
        b.constraint(t, "=", ctx.goal(n))
    for n in priced_out:
        t = _weight_terms(ctx, n)
        t[f"out_gdev_p:{n}"] = -1.0
        t[f"out_gdev_m:{n}"] = 1.0
        b.constraint(t, "=", ctx.goal(n))
    b.constraint({f"weight:{j}": 1.0 for j in ctx.E}, "=", 1.0)
    _hyperplane_rows(b, ctx)

    actual_terms: dict[str, float] = {}
    goal_terms: dict[str, float] = {}
    for n in priced_in:
        w = 1.0 / ctx.actual(n)
        actual_terms[f"in_dev_p:{n}"] = w
        actual_terms[f"in_dev_m:{n}"] = w
        goal_terms[f"in_gdev_p:{n}"] = w
        goal_terms[f"in_gdev_m:{n}"] = w
    for n in priced_out:
        w = 1.0 / ctx.actual(n)
        actual_terms[f"out_dev_p:{n}"] = w
        actual_terms[f"out_dev_m:{n}"] = w
        goal_terms[f"out_gdev_p:{n}"] = w
        goal_terms[f"out_gdev_m:{n}"] = w
    pairs = [(f"weight:{j}", f"gap:{j}") for j in ctx.E]
    for n in unpriced_in:
        pairs.append((f"price_in:{n}", f"in_slack:{n}"))
    for n in unpriced_out:
        pairs.append((f"price_out:{n}", f"out_slack:{n}"))
    return _finish(b, ctx, alpha, actual_terms, goal_terms, pairs, kind)


def _build(dataset: Dataset, extreme, dmu_id: str, goal_map: dict[str, float],
           alpha: float, kind: ModelKind, general: bool) -> BuiltModel:
    ctx = _Ctx(dataset, extreme, dmu_id, goal_map)
    schema = dataset.schema
    has_nd = bool(schema.fixed_input_names or schema.fixed_output_names)
    if general or has_nd:
        return _build_general(ctx, alpha, kind)
    if kind is ModelKind.NON_ORIENTED:
        return _build_non_oriented(ctx, alpha)
    return _build_oriented(ctx, alpha, kind)


def build_model(tech: Technology, dmu_id: str, goals: GoalSet, alpha: float,
                kind: ModelKind | None = None, *, general: bool = False) -> BuiltModel:
    """Assemble the LP and complementarity pairs for one (DMU, alpha)."""
    if kind is None:
        kind = derive_model_kind(tech.schema, goals)
    if not goals.has(dmu_id):
        raise ValidationError(
            [ValidationIssue(MISSING_GOAL_ROW, f"no goal row for DMU {dmu_id!r}")]
        )
    return _build(tech.dataset, tech.extreme, dmu_id, goals.for_dmu(dmu_id),
                  float(alpha), kind, general)


def _stage2_program(bm: BuiltModel) -> LinearProgram:
    """Minimize the omitted distance holding the stage-1 optimum."""
    held = bm.actual_terms if bm.alpha == 1.0 else bm.goal_terms
    target = bm.goal_terms if bm.alpha == 1.0 else bm.actual_terms
    lp = bm.lp
    index = {v.id: k for k, v in enumerate(lp.variables)}
    row = np.zeros(len(lp.variables))
    for k, w in held.items():
        row[index[k]] = w
    obj = np.zeros(len(lp.variables))
    for k, w in target.items():
        obj[index[k]] = w
    return lp, index, row, obj


def _solve_two_stage(bm: BuiltModel, node_limit: int):
    """Stage 1 always; stage 2 only at the alpha endpoints."""
    bs1 = solve_sos1(bm.lp, bm.pairs, node_limit=node_limit)
    if bs1.status is not LpStatus.OPTIMAL:
        raise NumericalBreakdown(
            f"benchmark stage 1 for {bm.dmu_id!r} at alpha={bm.alpha} "
            f"ended {bs1.status.value}"
        )
    if bm.alpha not in (0.0, 1.0):
        return bs1, False, bs1.node_count
    lp, index, held_row, obj = _stage2_program(bm)
    cons = lp.constraints + (LpConstraint(held_row, "<=", bs1.objective + STAGE2_EPS),)
    lp2 = LinearProgram(lp.variables, cons, LpObjective(obj, "min"))
    bs2 = solve_sos1(lp2, bm.pairs, node_limit=node_limit)
    if bs2.status is not LpStatus.OPTIMAL:
        raise NumericalBreakdown(
            f"benchmark stage 2 for {bm.dmu_id!r} at alpha={bm.alpha} "
            f"ended {bs2.status.value}"
        )
    return bs2, True, bs1.node_count + bs2.node_count


def _result_from_solution(tech: Technology, dmu_id: str, goal_map: dict[str, float],
                          alpha: float, kind: ModelKind, bm: BuiltModel, sol,
                          stage2: bool, nodes: int,
                          factors: np.ndarray | None) -> BenchmarkResult:
    schema = tech.schema
    dataset = tech.dataset
    names = schema.names
    lam = [(j, sol.values[vid]) for j, vid in bm.lam_ids]

    # targets from the weights; mapped back when solved on rescaled data
    targets: dict[str, float] = {}
    for k, name in enumerate(names):
        level = math.fsum(w * float(dataset.value(j, name)) for j, w in lam)
        targets[name] = level
    if factors is not None:
        pass  # weights are scale-free; targets above already use original data

    priced_in, priced_out = priced_variables(schema, kind)
    input_dev = {n: float(dataset.value(dmu_id, n)) - targets[n] for n in schema.input_names}
    output_dev = {n: targets[n] - float(dataset.value(dmu_id, n)) for n in schema.output_names}
    input_goal_dev = {n: goal_map[n] - targets[n] for n in priced_in}
    output_goal_dev = {n: targets[n] - goal_map[n] for n in priced_out}

    d_actual = math.fsum(
        [abs(input_dev[n]) / float(dataset.value(dmu_id, n)) for n in priced_in]
        + [abs(output_dev[n]) / float(dataset.value(dmu_id, n)) for n in priced_out]
    )
    d_goal = math.fsum(
        [abs(input_goal_dev[n]) / float(dataset.value(dmu_id, n)) for n in priced_in]
        + [abs(output_goal_dev[n]) / float(dataset.value(dmu_id, n)) for n in priced_out]
    )
    reference = {j: float(w) for j, w in lam if w > SUPPORT_TOL}
    return BenchmarkResult(
        dmu_id=dmu_id,
        alpha=alpha,
        kind=kind,
        targets=targets,
        reference=reference,
        deviations=DeviationBundle(input_dev, output_dev, input_goal_dev, output_goal_dev),
        d_actual=d_actual,
        d_goal=d_goal,
        objective=alpha * d_actual + (1.0 - alpha) * d_goal,
        stage2_applied=stage2,
        node_count=nodes,
    )


def _rescaled(dataset: Dataset, goal_map: dict[str, float]):
    """Divide every column by its max; conditioning aid, optima unchanged."""
    factors = dataset.values.max(axis=0).astype(float)
    scaled = Dataset(dataset.schema, dataset.dmu_ids, dataset.values / factors[None, :])
    cols = {n: k for k, n in enumerate(dataset.schema.names)}
    gm = {n: g / factors[cols[n]] for n, g in goal_map.items()}
    return scaled, gm, factors


def solve_benchmark(tech: Technology, dmu_id: str, goals: GoalSet, alpha: float,
                    *, kind: ModelKind | None = None,
                    node_limit: int = DEFAULT_NODE_LIMIT,
                    rescale: bool = False, general: bool = False) -> BenchmarkResult:
    """Closest goal-adjusted frontier target for one DMU at one alpha."""
    schema = tech.schema
    if kind is None:
        kind = derive_model_kind(schema, goals)
    if not goals.has(dmu_id):
        raise ValidationError(
            [ValidationIssue(MISSING_GOAL_ROW, f"no goal row for DMU {dmu_id!r}")]
        )
    alpha = float(alpha)
    goal_map = goals.for_dmu(dmu_id)
    dataset = tech.dataset
    factors = None
    build_goal_map = goal_map
    if rescale:
        dataset, build_goal_map, factors = _rescaled(dataset, goal_map)
    bm = _build(dataset, tech.extreme, dmu_id, build_goal_map, alpha, kind, general)
    sol, stage2, nodes = _solve_two_stage(bm, node_limit)
    return _result_from_solution(tech, dmu_id, goal_map, alpha, kind, bm, sol,
                                 stage2, nodes, factors)


def sweep_alpha_grid(tech: Technology, dmu_id: str, goals: GoalSet,
                     grid: AlphaGrid | None = None, *,
                     kind: ModelKind | None = None,
                     node_limit: int = DEFAULT_NODE_LIMIT,
                     rescale: bool = False, general: bool = False) -> list[BenchmarkResult]:
    """Benchmark one DMU across the whole trade-off grid, grid order."""
    if grid is None:
        grid = AlphaGrid()
    return [
        solve_benchmark(tech, dmu_id, goals, a, kind=kind, node_limit=node_limit,
                        rescale=rescale, general=general)
        for a in grid
    ]
