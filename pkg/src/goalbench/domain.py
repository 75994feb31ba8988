"""Problem-instance types and validation.

A benchmarking instance is a variable schema (inputs/outputs, each one
controllable or not), a positive data table over decision making units
(DMUs), and a goal table covering a coherent subset of the controllable
variables. Validation collects every violation before raising so a bad
file produces one complete diagnostic, not a drip of single errors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

DEFAULT_ALPHA_GRID = (1.0, 0.8, 0.6, 0.5, 0.4, 0.2, 0.0)


class VarKind(Enum):
    INPUT = "input"
    OUTPUT = "output"


class ModelKind(Enum):
    """Which deviation terms the benchmark model prices.

    NON_ORIENTED: goals on every controllable variable, input and output
    deviations both priced. OUTPUT_ORIENTED: goals on the controllable
    outputs only; inputs may only tighten. INPUT_ORIENTED: the mirror case.
    """

    NON_ORIENTED = "non-oriented"
    OUTPUT_ORIENTED = "output-oriented"
    INPUT_ORIENTED = "input-oriented"


@dataclass(frozen=True)
class Variable:
    name: str
    kind: VarKind
    controllable: bool = True


@dataclass(frozen=True)
class VariableSchema:
    """Ordered variable declarations; order fixes column order everywhere."""

    variables: tuple[Variable, ...]

    def __init__(self, variables) -> None:
        object.__setattr__(self, "variables", tuple(variables))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    def by_name(self, name: str) -> Variable:
        for v in self.variables:
            if v.name == name:
                return v
        raise KeyError(name)

    def _names_where(self, kind: VarKind, controllable=None) -> tuple[str, ...]:
        return tuple(
            v.name
            for v in self.variables
            if v.kind is kind and (controllable is None or v.controllable == controllable)
        )

    @property
    def input_names(self) -> tuple[str, ...]:
        return self._names_where(VarKind.INPUT)

    @property
    def output_names(self) -> tuple[str, ...]:
        return self._names_where(VarKind.OUTPUT)

    @property
    def controllable_input_names(self) -> tuple[str, ...]:
        return self._names_where(VarKind.INPUT, controllable=True)

    @property
    def controllable_output_names(self) -> tuple[str, ...]:
        return self._names_where(VarKind.OUTPUT, controllable=True)

    @property
    def fixed_input_names(self) -> tuple[str, ...]:
        return self._names_where(VarKind.INPUT, controllable=False)

    @property
    def fixed_output_names(self) -> tuple[str, ...]:
        return self._names_where(VarKind.OUTPUT, controllable=False)

    @property
    def controllable_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables if v.controllable)


@dataclass(frozen=True)
class Dataset:
    """DMU ids plus a dense value matrix aligned with the schema order."""

    schema: VariableSchema
    dmu_ids: tuple[str, ...]
    values: np.ndarray  # shape (n_dmus, n_variables), float64

    def __init__(self, schema, dmu_ids, values) -> None:
        object.__setattr__(self, "schema", schema)
        object.__setattr__(self, "dmu_ids", tuple(dmu_ids))
        arr = np.ascontiguousarray(np.asarray(values, dtype=float))
        if arr.ndim != 2 or arr.shape != (len(self.dmu_ids), len(schema.variables)):
            raise ValueError(
                f"value matrix shape {arr.shape} does not match "
                f"{len(self.dmu_ids)} DMUs x {len(schema.variables)} variables"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Dataset)
            and self.schema == other.schema
            and self.dmu_ids == other.dmu_ids
            and np.array_equal(self.values, other.values)
        )

    @classmethod
    def from_rows(cls, schema: VariableSchema, rows) -> "Dataset":
        """rows: iterable of (dmu_id, {variable name: value})."""
        ids = []
        data = []
        names = schema.names
        for dmu_id, mapping in rows:
            extra = set(mapping) - set(names)
            if extra:
                raise KeyError(f"unknown variable(s) {sorted(extra)} in row {dmu_id!r}")
            missing = set(names) - set(mapping)
            if missing:
                raise KeyError(f"missing variable(s) {sorted(missing)} in row {dmu_id!r}")
            ids.append(str(dmu_id))
            data.append([float(mapping[n]) for n in names])
        return cls(schema, ids, np.array(data, dtype=float).reshape(len(ids), len(names)))

    @property
    def n(self) -> int:
        return len(self.dmu_ids)

    def index_of(self, dmu_id: str) -> int:
        try:
            return self.dmu_ids.index(dmu_id)
        except ValueError:
            raise KeyError(f"unknown DMU id {dmu_id!r}") from None

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.schema.names.index(name)]

    def row(self, dmu_id: str) -> np.ndarray:
        return self.values[self.index_of(dmu_id)]

    def value(self, dmu_id: str, name: str) -> float:
        return float(self.values[self.index_of(dmu_id), self.schema.names.index(name)])


@dataclass(frozen=True)
class GoalSet:
    """Goal levels per DMU over one fixed set of covered variable names.

    Coverage is global: every goal row states a level for every covered
    variable, mirroring a rectangular goals file.
    """

    covered_names: tuple[str, ...]
    levels: tuple[tuple[str, tuple[float, ...]], ...]  # (dmu_id, values in covered order)

    def __init__(self, covered_names, levels) -> None:
        object.__setattr__(self, "covered_names", tuple(covered_names))
        canon = []
        for dmu_id, vals in levels:
            vals = tuple(float(x) for x in vals)
            if len(vals) != len(self.covered_names):
                raise ValueError(
                    f"goal row {dmu_id!r} has {len(vals)} values, "
                    f"expected {len(self.covered_names)}"
                )
            canon.append((str(dmu_id), vals))
        object.__setattr__(self, "levels", tuple(canon))

    @classmethod
    def from_mapping(cls, mapping) -> "GoalSet":
        """mapping: {dmu_id: {variable name: goal level}}, uniform keys."""
        items = list(mapping.items())
        if not items:
            return cls((), ())
        names = tuple(items[0][1].keys())
        return cls(names, [(d, tuple(m[n] for n in names)) for d, m in items])

    @property
    def dmu_ids(self) -> tuple[str, ...]:
        return tuple(d for d, _ in self.levels)

    def has(self, dmu_id: str) -> bool:
        return any(d == dmu_id for d, _ in self.levels)

    def for_dmu(self, dmu_id: str) -> dict[str, float]:
        for d, vals in self.levels:
            if d == dmu_id:
                return dict(zip(self.covered_names, vals))
        raise KeyError(f"no goal row for DMU {dmu_id!r}")


@dataclass(frozen=True)
class AlphaGrid:
    """Descending-or-any-order list of trade-off weights in [0, 1]."""

    values: tuple[float, ...]

    def __init__(self, values=DEFAULT_ALPHA_GRID) -> None:
        vals = tuple(float(a) for a in values)
        if not vals:
            raise ValueError("alpha grid must be non-empty")
        for a in vals:
            if not (0.0 <= a <= 1.0) or not math.isfinite(a):
                raise ValueError(f"alpha value {a!r} outside [0, 1]")
        if len(set(vals)) != len(vals):
            raise ValueError("alpha grid contains duplicate values")
        object.__setattr__(self, "values", vals)

    def __iter__(self):
        return iter(self.values)

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class ValidatedInstance:
    schema: VariableSchema
    dataset: Dataset
    goals: GoalSet
    kind: ModelKind


@dataclass(frozen=True)
class ValidationIssue:
    code: str
    message: str

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


class ValidationError(Exception):
    """Carries every issue found, not just the first."""

    def __init__(self, issues) -> None:
        self.issues = list(issues)
        super().__init__("; ".join(str(i) for i in self.issues))


# Issue codes. Kept as plain strings so diagnostics serialize trivially.
NON_POSITIVE_VALUE = "NonPositiveValue"
UNKNOWN_VARIABLE = "UnknownVariable"
DUPLICATE_DMU = "DuplicateDmu"
INCOHERENT_GOAL_COVERAGE = "IncoherentGoalCoverage"
MISSING_GOAL_ROW = "MissingGoalRow"
INVALID_SCHEMA = "InvalidSchema"


def _schema_issues(schema: VariableSchema) -> list[ValidationIssue]:
    issues = []
    seen = set()
    for v in schema.variables:
        if v.name in seen:
            issues.append(ValidationIssue(INVALID_SCHEMA, f"duplicate variable name {v.name!r}"))
        seen.add(v.name)
    if not schema.input_names:
        issues.append(ValidationIssue(INVALID_SCHEMA, "schema declares no input variable"))
    if not schema.output_names:
        issues.append(ValidationIssue(INVALID_SCHEMA, "schema declares no output variable"))
    if not schema.controllable_names:
        issues.append(ValidationIssue(INVALID_SCHEMA, "schema declares no controllable variable"))
    return issues


def _coverage_kind(schema: VariableSchema, covered: set[str]) -> ModelKind | None:
    ctrl_in = set(schema.controllable_input_names)
    ctrl_out = set(schema.controllable_output_names)
    if not covered:
        return None
    # When one controllable side is empty, "all controllables" coincides with
    # the oriented coverage; the oriented label wins (same model either way).
    if covered == ctrl_in | ctrl_out and ctrl_in and ctrl_out:
        return ModelKind.NON_ORIENTED
    if covered == ctrl_out:
        return ModelKind.OUTPUT_ORIENTED
    if covered == ctrl_in:
        return ModelKind.INPUT_ORIENTED
    return None


def priced_variables(schema: VariableSchema, kind: ModelKind) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """Inputs and outputs whose deviations the model prices under this kind.

    Unpriced variables (the complements) may only tighten (inputs) or
    expand (outputs) and carry price-slack complementarity instead of
    deviation terms; non-controllable variables are always unpriced.
    """
    if kind is ModelKind.NON_ORIENTED:
        return schema.controllable_input_names, schema.controllable_output_names
    if kind is ModelKind.OUTPUT_ORIENTED:
        return (), schema.controllable_output_names
    return schema.controllable_input_names, ()


def derive_model_kind(schema: VariableSchema, goals: GoalSet) -> ModelKind:
    """Classify the goal coverage; raises ValidationError when incoherent."""
    covered = set(goals.covered_names)
    unknown = covered - set(schema.names)
    if unknown:
        raise ValidationError(
            [ValidationIssue(UNKNOWN_VARIABLE, f"goal variable {n!r} not in schema") for n in sorted(unknown)]
        )
    uncontrollable = covered & (set(schema.names) - set(schema.controllable_names))
    if uncontrollable:
        raise ValidationError(
            [
                ValidationIssue(
                    INCOHERENT_GOAL_COVERAGE,
                    f"goal on non-controllable variable {n!r}",
                )
                for n in sorted(uncontrollable)
            ]
        )
    kind = _coverage_kind(schema, covered)
    if kind is None:
        raise ValidationError(
            [
                ValidationIssue(
                    INCOHERENT_GOAL_COVERAGE,
                    "goals must cover all controllable variables, all controllable "
                    f"outputs, or all controllable inputs; got {sorted(covered)}",
                )
            ]
        )
    return kind


def validate(schema: VariableSchema, dataset: Dataset, goals: GoalSet) -> ValidatedInstance:
    """Full instance validation; collects all issues, then raises or returns."""
    issues = _schema_issues(schema)

    seen_ids = set()
    for dmu_id in dataset.dmu_ids:
        if dmu_id in seen_ids:
            issues.append(ValidationIssue(DUPLICATE_DMU, f"DMU id {dmu_id!r} appears twice"))
        seen_ids.add(dmu_id)
    for i, dmu_id in enumerate(dataset.dmu_ids):
        for j, name in enumerate(schema.names):
            x = dataset.values[i, j]
            if not math.isfinite(x) or x <= 0.0:
                issues.append(
                    ValidationIssue(
                        NON_POSITIVE_VALUE,
                        f"value {x!r} for DMU {dmu_id!r}, variable {name!r} must be finite and > 0",
                    )
                )

    if not goals.levels:
        issues.append(ValidationIssue(MISSING_GOAL_ROW, "goal table has no rows"))
    seen_goal_ids = set()
    for dmu_id, vals in goals.levels:
        if dmu_id in seen_goal_ids:
            issues.append(ValidationIssue(DUPLICATE_DMU, f"duplicate goal row for DMU {dmu_id!r}"))
        seen_goal_ids.add(dmu_id)
        if dmu_id not in seen_ids:
            issues.append(
                ValidationIssue(MISSING_GOAL_ROW, f"goal row for unknown DMU {dmu_id!r} has no data row")
            )
        for name, g in zip(goals.covered_names, vals):
            if not math.isfinite(g) or g <= 0.0:
                issues.append(
                    ValidationIssue(
                        NON_POSITIVE_VALUE,
                        f"goal {g!r} for DMU {dmu_id!r}, variable {name!r} must be finite and > 0",
                    )
                )

    kind = None
    if goals.levels:
        try:
            kind = derive_model_kind(schema, goals)
        except ValidationError as exc:
            issues.extend(exc.issues)

    if issues:
        raise ValidationError(issues)
    assert kind is not None
    return ValidatedInstance(schema, dataset, goals, kind)
