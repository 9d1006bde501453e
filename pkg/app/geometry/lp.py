"""Exact two-phase simplex with Bland's rule."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Literal

from app.core.errors import DimensionMismatchError, UnboundedPolytopeError
from app.geometry.numbers import Scalar
from app.geometry.points import HalfSpace, Point
from app.geometry.scalars import context_for

logger = logging.getLogger(__name__)


class LPStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LPSolution:
    """Raw solver output; values live in the solver's arithmetic context."""

    status: LPStatus
    value: Any = None
    x: tuple[Any, ...] = ()


@dataclass(frozen=True)
class LPResult:
    status: LPStatus
    value: Scalar | None = None
    point: Point | None = None


@dataclass
class _Tableau:
    ctx: Any
    rows: list[list[Any]]
    basis: list[int]

    def pivot(self, row: int, column: int) -> None:
        ctx = self.ctx
        pivot_row = self.rows[row]
        pivot_value = pivot_row[column]
        pivot_row = [value / pivot_value for value in pivot_row]
        self.rows[row] = pivot_row
        for index, other in enumerate(self.rows):
            if index == row:
                continue
            factor = other[column]
            if ctx.is_zero(factor):
                continue
            self.rows[index] = [a - factor * b for a, b in zip(other, pivot_row)]
        self.basis[row] = column

    def reduced_costs(self, cost: Sequence[Any], columns: Sequence[int]) -> dict[int, Any]:
        ctx = self.ctx
        result: dict[int, Any] = {}
        for column in columns:
            value = cost[column]
            for row, basic in zip(self.rows, self.basis):
                weight = cost[basic]
                if not ctx.is_zero(weight) and not ctx.is_zero(row[column]):
                    value = value - weight * row[column]
            result[column] = value
        return result

    def objective(self, cost: Sequence[Any]) -> Any:
        total = self.ctx.zero
        for row, basic in zip(self.rows, self.basis):
            total = total + cost[basic] * row[-1]
        return total

    def run(self, cost: Sequence[Any], columns: Sequence[int]) -> LPStatus:
        """Maximize cost over the current basis using Bland's smallest-index rule."""

        ctx = self.ctx
        pivots = 0
        while True:
            basic = set(self.basis)
            entering = None
            for column in columns:
                if column in basic:
                    continue
                reduced = self.reduced_costs(cost, (column,))[column]
                if ctx.sign(reduced) > 0:
                    entering = column
                    break
            if entering is None:
                logger.debug("simplex optimal after %d pivots", pivots)
                return LPStatus.OPTIMAL
            leaving = None
            best_ratio = None
            for index, row in enumerate(self.rows):
                coefficient = row[entering]
                if ctx.sign(coefficient) <= 0:
                    continue
                ratio = row[-1] / coefficient
                if best_ratio is None:
                    leaving, best_ratio = index, ratio
                    continue
                comparison = ctx.sign(ratio - best_ratio)
                if comparison < 0 or (comparison == 0 and self.basis[index] < self.basis[leaving]):
                    leaving, best_ratio = index, ratio
            if leaving is None:
                return LPStatus.UNBOUNDED
            self.pivot(leaving, entering)
            pivots += 1


class LinearProgram:
    """{x : E x = e, A x <= a, x_j >= 0 unless j is free}, solved for any number of objectives.

    Phase one runs once; each objective restarts phase two from the same feasible basis.
    """

    def __init__(
        self,
        ctx: Any,
        num_vars: int,
        *,
        equalities: Sequence[tuple[Sequence[Any], Any]] = (),
        inequalities: Sequence[tuple[Sequence[Any], Any]] = (),
        free: Sequence[int] = (),
    ) -> None:
        self.ctx = ctx
        self.num_vars = num_vars
        free_set = set(free)
        self._columns: list[tuple[int, int]] = []
        for variable in range(num_vars):
            self._columns.append((variable, 1))
            if variable in free_set:
                self._columns.append((variable, -1))
        self._slack_count = len(inequalities)
        self._width = len(self._columns) + self._slack_count
        self._rows: list[list[Any]] = []
        for coefficients, value in equalities:
            self._add_row(self._expand(coefficients) + [ctx.zero] * self._slack_count, value)
        for index, (coefficients, value) in enumerate(inequalities):
            slack = [ctx.one if other == index else ctx.zero for other in range(self._slack_count)]
            self._add_row(self._expand(coefficients) + slack, value)
        self._feasible: _Tableau | None = None
        self._phase_one_done = False

    def _expand(self, coefficients: Sequence[Any]) -> list[Any]:
        values = [self.ctx.coerce(value) for value in coefficients]
        if len(values) != self.num_vars:
            raise DimensionMismatchError("Constraint length differs from variable count")
        return [values[variable] if direction > 0 else -values[variable] for variable, direction in self._columns]

    def _add_row(self, row: list[Any], value: Any) -> None:
        right = self.ctx.coerce(value)
        if self.ctx.sign(right) < 0:
            row = [-entry for entry in row]
            right = -right
        self._rows.append(row + [right])

    def _phase_one(self) -> _Tableau | None:
        if self._phase_one_done:
            return self._feasible
        self._phase_one_done = True
        ctx, width, height = self.ctx, self._width, len(self._rows)
        rows = []
        for index, row in enumerate(self._rows):
            artificial = [ctx.one if other == index else ctx.zero for other in range(height)]
            rows.append(row[:-1] + artificial + [row[-1]])
        tableau = _Tableau(ctx=ctx, rows=rows, basis=[width + index for index in range(height)])
        cost = [ctx.zero] * width + [-ctx.one] * height
        tableau.run(cost, range(width + height))
        if ctx.sign(tableau.objective(cost)) < 0:
            return None
        # Drive remaining artificials out; rows that cannot pivot are redundant.
        index = 0
        while index < len(tableau.rows):
            if tableau.basis[index] >= width:
                row = tableau.rows[index]
                column = next((j for j in range(width) if not ctx.is_zero(row[j])), None)
                if column is None:
                    del tableau.rows[index]
                    del tableau.basis[index]
                    continue
                tableau.pivot(index, column)
            index += 1
        tableau.rows = [row[:width] + [row[-1]] for row in tableau.rows]
        self._feasible = tableau
        return tableau

    @property
    def feasible(self) -> bool:
        return self._phase_one() is not None

    def optimize(self, objective: Sequence[Any] | None = None, *, maximize: bool = True) -> LPSolution:
        ctx = self.ctx
        start = self._phase_one()
        if start is None:
            return LPSolution(LPStatus.INFEASIBLE)
        target = objective if objective is not None else [ctx.zero] * self.num_vars
        cost = self._expand(target) + [ctx.zero] * self._slack_count
        if not maximize:
            cost = [-value for value in cost]
        tableau = _Tableau(ctx=ctx, rows=[list(row) for row in start.rows], basis=list(start.basis))
        if tableau.run(cost, range(self._width)) is LPStatus.UNBOUNDED:
            return LPSolution(LPStatus.UNBOUNDED)
        raw = [ctx.zero] * self._width
        for row, basic in zip(tableau.rows, tableau.basis):
            raw[basic] = row[-1]
        values = [ctx.zero] * self.num_vars
        for (variable, direction), amount in zip(self._columns, raw):
            values[variable] = values[variable] + amount if direction > 0 else values[variable] - amount
        value = tableau.objective(cost)
        return LPSolution(LPStatus.OPTIMAL, value if maximize else -value, tuple(values))


def solve_general(
    ctx: Any,
    num_vars: int,
    *,
    equalities: Sequence[tuple[Sequence[Any], Any]] = (),
    inequalities: Sequence[tuple[Sequence[Any], Any]] = (),
    objective: Sequence[Any] | None = None,
    maximize: bool = True,
    free: Sequence[int] = (),
) -> LPSolution:
    program = LinearProgram(ctx, num_vars, equalities=equalities, inequalities=inequalities, free=free)
    return program.optimize(objective, maximize=maximize)


def lp_optimize(
    constraints: Sequence[HalfSpace],
    objective: Sequence[Fraction | int],
    direction: Literal["min", "max"] = "max",
) -> LPResult:
    """Optimize a rational objective over the polyhedron cut out by the half-spaces."""

    if not constraints:
        raise DimensionMismatchError("lp_optimize needs at least one constraint")
    dimension = constraints[0].dimension
    if any(halfspace.dimension != dimension for halfspace in constraints) or len(objective) != dimension:
        raise DimensionMismatchError("Inconsistent LP dimensions")
    ctx = context_for(halfspace.offset for halfspace in constraints)
    raw = solve_general(
        ctx,
        dimension,
        inequalities=[(halfspace.normal, halfspace.offset) for halfspace in constraints],
        objective=[Fraction(value) for value in objective],
        maximize=direction == "max",
        free=range(dimension),
    )
    if raw.status is not LPStatus.OPTIMAL:
        return LPResult(raw.status)
    return LPResult(
        LPStatus.OPTIMAL,
        value=ctx.demote(raw.value),
        point=Point(ctx.demote(value) for value in raw.x),
    )


def bounding_box(constraints: Sequence[HalfSpace]) -> tuple[list[Scalar], list[Scalar]] | None:
    """Per-axis minima and maxima of the polyhedron, None when it is empty."""

    if not constraints:
        raise DimensionMismatchError("bounding_box needs at least one constraint")
    dimension = constraints[0].dimension
    ctx = context_for(halfspace.offset for halfspace in constraints)
    program = LinearProgram(
        ctx,
        dimension,
        inequalities=[(halfspace.normal, halfspace.offset) for halfspace in constraints],
        free=range(dimension),
    )
    if not program.feasible:
        return None
    lower: list[Scalar] = []
    upper: list[Scalar] = []
    for axis in range(dimension):
        direction = [int(position == axis) for position in range(dimension)]
        for bounds, maximize in ((lower, False), (upper, True)):
            solution = program.optimize(direction, maximize=maximize)
            if solution.status is LPStatus.UNBOUNDED:
                raise UnboundedPolytopeError(f"The polyhedron is unbounded along axis {axis}")
            bounds.append(ctx.demote(solution.value))
    return lower, upper
