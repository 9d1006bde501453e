"""The leave-one-out core of a point configuration."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from fractions import Fraction
from functools import cached_property
from typing import Any

from app.core.errors import DimensionMismatchError
from app.geometry import linalg
from app.geometry.lp import LinearProgram, LPStatus
from app.geometry.points import HalfSpace, Point, check_same_dimension
from app.geometry.predicates import RationalHull, convex_hull_2d, hull_facets, in_hull
from app.geometry.scalars import context_for

logger = logging.getLogger(__name__)


class CorePolytope:
    """Intersection over i of conv(R minus x_i).

    Queries run on one LP over the core point p: the facet inequalities of every
    leave-one-out hull when all of them are full-dimensional, otherwise explicit
    convex weights expressing p inside each hull.
    """

    def __init__(self, generators: Sequence[Point]) -> None:
        if len(generators) < 2:
            raise DimensionMismatchError("The core needs at least two generators")
        self.dimension = check_same_dimension(generators)
        self.generators = tuple(generators)
        self.ctx = context_for(value for point in generators for value in point.coordinates)
        self._extremes: dict[tuple[int, int], tuple[Any, ...]] = {}

    def leave_one_out(self, index: int) -> list[Point]:
        return [point for position, point in enumerate(self.generators) if position != index]

    @cached_property
    def _facet_rows(self) -> list[tuple[tuple[Any, ...], Any]] | None:
        """All inward facets of the leave-one-out hulls, None when one of them is not full-dimensional."""

        rows: list[tuple[tuple[Any, ...], Any]] = []
        for index in range(len(self.generators)):
            facets = hull_facets(self.ctx, self.leave_one_out(index))
            if facets is None:
                return None
            rows.extend(facet for facet in facets if facet not in rows)
        return rows

    @cached_property
    def _program(self) -> LinearProgram:
        facets = self._facet_rows
        if facets is not None:
            inequalities = [([-value for value in normal], -offset) for normal, offset in facets]
            return LinearProgram(self.ctx, self.dimension, inequalities=inequalities, free=range(self.dimension))
        # Convex weights expressing p inside every leave-one-out hull.
        dimension, count = self.dimension, len(self.generators)
        num_vars = dimension + count * (count - 1)
        equalities: list[tuple[list[Any], Any]] = []
        offset = dimension
        for index in range(count):
            others = self.leave_one_out(index)
            for axis in range(dimension):
                row: list[Any] = [0] * num_vars
                row[axis] = -1
                for position, point in enumerate(others):
                    row[offset + position] = point[axis]
                equalities.append((row, 0))
            weights: list[Any] = [0] * num_vars
            for position in range(len(others)):
                weights[offset + position] = 1
            equalities.append((weights, 1))
            offset += len(others)
        return LinearProgram(self.ctx, num_vars, equalities=equalities, free=range(dimension))

    def _optimize(self, direction: Sequence[Any], maximize: bool) -> tuple[Any, ...]:
        objective = list(direction) + [0] * (self._program.num_vars - self.dimension)
        solution = self._program.optimize(objective, maximize=maximize)
        if solution.status is not LPStatus.OPTIMAL:
            raise DimensionMismatchError(f"Core LP ended {solution.status.value}")
        return solution.x[: self.dimension]

    def _demote(self, vector: Sequence[Any]) -> Point:
        """Exact point for an LP vertex; raises UnsupportedCoordinateError when not Q-linear in the labels."""

        return Point(self.ctx.demote(value) for value in vector)

    def is_empty(self) -> bool:
        return not self._program.feasible

    def _axis_extreme(self, axis: int, maximize: bool) -> tuple[Any, ...]:
        key = (axis, int(maximize))
        if key not in self._extremes:
            direction = [1 if position == axis else 0 for position in range(self.dimension)]
            self._extremes[key] = self._optimize(direction, maximize)
        return self._extremes[key]

    def bbox(self) -> tuple[Point, Point] | None:
        """Exact bounding box of the core, None when empty."""

        if self.is_empty():
            return None
        lower = self._demote([self._axis_extreme(axis, False)[axis] for axis in range(self.dimension)])
        upper = self._demote([self._axis_extreme(axis, True)[axis] for axis in range(self.dimension)])
        return lower, upper

    @cached_property
    def _affine_witnesses(self) -> list[tuple[Any, ...]]:
        """Affinely independent core vertices spanning the affine hull of the core."""

        if self.is_empty():
            return []
        found = [self._axis_extreme(0, True)]
        candidates = [self._axis_extreme(axis, flag) for axis in range(self.dimension) for flag in (False, True)]
        for candidate in candidates:
            if _extends_span(self.ctx, found, candidate):
                found.append(candidate)
        tested: list[list[Any]] = []
        while len(found) <= self.dimension:
            directions = _complement(self.ctx, found, self.dimension, tested)
            if not directions:
                break
            direction = directions[0]
            tested.append(direction)
            for maximize in (True, False):
                candidate = self._optimize(direction, maximize)
                if _extends_span(self.ctx, found, candidate):
                    found.append(candidate)
                    break
        logger.debug("core of %d generators has dimension %d", len(self.generators), len(found) - 1)
        return found

    def dim(self) -> int:
        """Affine dimension of the core, -1 when empty."""

        return len(self._affine_witnesses) - 1

    def point(self) -> Point:
        if self.dim() != 0:
            raise DimensionMismatchError("core_point is defined only for zero-dimensional cores")
        return self._demote(self._affine_witnesses[0])

    def witnesses(self) -> list[Point]:
        return [self._demote(vector) for vector in self._affine_witnesses]

    def contains(self, point: Point) -> bool:
        if point.dimension != self.dimension:
            raise DimensionMismatchError("Point and core dimensions differ")
        return all(in_hull(point, self.leave_one_out(index)) for index in range(len(self.generators)))

    @cached_property
    def _rational_hulls(self) -> list[RationalHull] | None:
        if not all(point.is_rational for point in self.generators):
            return None
        return [RationalHull(self.leave_one_out(index)) for index in range(len(self.generators))]

    def contains_fast(self, point: Point) -> bool:
        """contains() with the per-hull membership structures cached (rational generators)."""

        hulls = self._rational_hulls
        if hulls is None or not point.is_rational:
            return self.contains(point)
        return all(hull.contains(point) for hull in hulls)

    @cached_property
    def halfspaces(self) -> list[HalfSpace] | None:
        """Half-space description of a rational core whose leave-one-out hulls are full-dimensional."""

        if self._rational_hulls is None or self._facet_rows is None:
            return None
        return [HalfSpace(tuple(-value for value in normal), -offset) for normal, offset in self._facet_rows]

    def polygon(self) -> list[Point]:
        """Counter-clockwise vertices of a rational planar core (empty list when the core is empty)."""

        if self.dimension != 2 or self._rational_hulls is None:
            raise DimensionMismatchError("polygon() needs rational planar generators")
        if self.is_empty():
            return []
        polygon = convex_hull_2d(self.generators)
        for index in range(len(self.generators)):
            polygon = _clip(polygon, convex_hull_2d(self.leave_one_out(index)))
            if not polygon:
                break
        return polygon


def _extends_span(ctx: Any, found: list[tuple[Any, ...]], candidate: tuple[Any, ...]) -> bool:
    base = found[0]
    rows = [[a - b for a, b in zip(vector, base)] for vector in [*found[1:], candidate]]
    return linalg.rank(ctx, rows) == len(found)


def _complement(
    ctx: Any, found: list[tuple[Any, ...]], dimension: int, tested: list[list[Any]]
) -> list[list[Any]]:
    """Directions orthogonal to the span of found points and to every direction already tested."""

    base = found[0]
    rows: list[list[Any]] = [[a - b for a, b in zip(vector, base)] for vector in found[1:]]
    rows.extend(tested)
    return linalg.nullspace(ctx, rows, width=dimension)


def _clip(polygon: list[Point], convex: list[Point]) -> list[Point]:
    """Sutherland-Hodgman clipping of a convex polygon by a counter-clockwise convex polygon."""

    if not polygon:
        return []
    if len(convex) < 3:
        if len(polygon) >= 3:
            return _clip(convex, polygon)
        return _dedupe(
            [point for point in convex if in_hull(point, polygon)]
            + [point for point in polygon if in_hull(point, convex)]
        )
    result = list(polygon)
    count = len(convex)
    for index in range(count):
        a, b = convex[index], convex[(index + 1) % count]
        if not result:
            break
        source, result = result, []
        for position, current in enumerate(source):
            previous = source[position - 1]
            current_side = _side(a, b, current)
            previous_side = _side(a, b, previous)
            if current_side >= 0:
                if previous_side < 0:
                    result.append(_intersection(a, b, previous, current))
                result.append(current)
            elif previous_side >= 0:
                result.append(_intersection(a, b, previous, current))
        result = _dedupe(result)
    return convex_hull_2d(result) if len(result) > 2 else result


def _side(a: Point, b: Point, point: Point) -> Fraction:
    return (b[0] - a[0]) * (point[1] - a[1]) - (b[1] - a[1]) * (point[0] - a[0])


def _intersection(a: Point, b: Point, p: Point, q: Point) -> Point:
    side_p, side_q = _side(a, b, p), _side(a, b, q)
    weight = side_p / (side_p - side_q)
    return Point(u + weight * (v - u) for u, v in zip(p.coordinates, q.coordinates))


def _dedupe(points: list[Point]) -> list[Point]:
    result: list[Point] = []
    for point in points:
        if not result or result[-1] != point:
            result.append(point)
    if len(result) > 1 and result[0] == result[-1]:
        result.pop()
    return result


def core(generators: Sequence[Point]) -> CorePolytope:
    return CorePolytope(generators)
