"""Exact orientation, hull membership and convex-position predicates."""

from __future__ import annotations

import itertools
import logging
from collections.abc import Sequence
from fractions import Fraction
from typing import Any

from app.core.errors import DimensionMismatchError
from app.geometry import linalg
from app.geometry.lp import LPStatus, solve_general
from app.geometry.points import Point, check_same_dimension
from app.geometry.scalars import RATIONAL, context_for

logger = logging.getLogger(__name__)


def _cross(o: Sequence[Fraction], a: Sequence[Fraction], b: Sequence[Fraction]) -> Fraction:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def orientation(points: Sequence[Point]) -> int:
    """Sign of det(p1 - p0, ..., pd - p0) for d+1 points in R^d."""

    dimension = check_same_dimension(points)
    if len(points) != dimension + 1:
        raise DimensionMismatchError(f"orientation needs {dimension + 1} points in dimension {dimension}")
    origin = points[0]
    rows = [[a - b for a, b in zip(point.coordinates, origin.coordinates)] for point in points[1:]]
    if dimension == 2 and all(point.is_rational for point in points):
        value = rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
        return (value > 0) - (value < 0)
    ctx = context_for(value for row in rows for value in row)
    return ctx.sign(linalg.determinant(ctx, rows))


def convex_hull_2d(points: Sequence[Point]) -> list[Point]:
    """Vertices of the hull of rational planar points, counter-clockwise, collinear points dropped."""

    unique = sorted(set(points), key=lambda point: point.coordinates)
    if len(unique) <= 2:
        return unique
    lower: list[Point] = []
    for point in unique:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], point) <= 0:
            lower.pop()
        lower.append(point)
    upper: list[Point] = []
    for point in reversed(unique):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], point) <= 0:
            upper.pop()
        upper.append(point)
    hull = lower[:-1] + upper[:-1]
    return hull if len(hull) >= 2 else unique[:1] + unique[-1:]


class RationalHull:
    """Closed convex hull of rational points with a cached membership structure."""

    def __init__(self, points: Sequence[Point]) -> None:
        self.dimension = check_same_dimension(points)
        self.points = list(points)
        self.vertices_2d: list[Point] | None = None
        self.facets: list[tuple[tuple[Fraction, ...], Fraction]] | None = None
        self.low: Fraction | None = None
        self.high: Fraction | None = None
        if self.dimension == 1:
            values = [point[0] for point in self.points]
            self.low, self.high = min(values), max(values)
        elif self.dimension == 2:
            self.vertices_2d = convex_hull_2d(self.points)
        elif self.dimension == 3:
            self.facets = hull_facets(RATIONAL, self.points)

    def contains(self, point: Point) -> bool:
        if point.dimension != self.dimension:
            raise DimensionMismatchError("Point and hull dimensions differ")
        if not point.is_rational:
            return _lp_in_hull(point, self.points)
        if self.dimension == 1:
            return self.low <= point[0] <= self.high
        if self.vertices_2d is not None:
            return _in_polygon(point, self.vertices_2d)
        if self.facets is not None:
            return all(
                sum((n * x for n, x in zip(normal, point.coordinates)), Fraction(0)) >= offset
                for normal, offset in self.facets
            )
        return _lp_in_hull(point, self.points)


def _in_polygon(point: Point, vertices: list[Point]) -> bool:
    if len(vertices) == 1:
        return point == vertices[0]
    if len(vertices) == 2:
        a, b = vertices
        if _cross(a, b, point) != 0:
            return False
        return all(min(u, v) <= x <= max(u, v) for u, v, x in zip(a.coordinates, b.coordinates, point.coordinates))
    count = len(vertices)
    return all(_cross(vertices[index], vertices[(index + 1) % count], point) >= 0 for index in range(count))


def hull_facets(ctx: Any, points: Sequence[Point]) -> list[tuple[tuple[Any, ...], Any]] | None:
    """Inward facet inequalities normal . x >= offset, or None when the points are not full-dimensional.

    Facet normals are scaled so their first nonzero entry is +1 or -1; duplicates are dropped.
    """

    dimension = check_same_dimension(points)
    coordinates = [[ctx.coerce(value) for value in point.coordinates] for point in points]
    base = coordinates[0]
    if linalg.rank(ctx, [[a - b for a, b in zip(row, base)] for row in coordinates[1:]]) < dimension:
        return None
    facets: list[tuple[tuple[Any, ...], Any]] = []
    for subset in itertools.combinations(range(len(coordinates)), dimension):
        origin = coordinates[subset[0]]
        differences = [[a - b for a, b in zip(coordinates[k], origin)] for k in subset[1:]]
        normal = []
        for column in range(dimension):
            minor = linalg.determinant(ctx, [row[:column] + row[column + 1 :] for row in differences])
            normal.append(minor if column % 2 == 0 else -minor)
        leading = next((value for value in normal if not ctx.is_zero(value)), None)
        if leading is None:
            continue
        if ctx.sign(leading) < 0:
            leading = -leading
        normal = [value / leading for value in normal]
        offset = _dot(ctx, normal, origin)
        sides = [ctx.sign(_dot(ctx, normal, row) - offset) for row in coordinates]
        if all(value >= 0 for value in sides):
            facet = (tuple(normal), offset)
        elif all(value <= 0 for value in sides):
            facet = (tuple(-value for value in normal), -offset)
        else:
            continue
        if facet not in facets:
            facets.append(facet)
    return facets


def _dot(ctx: Any, normal: Sequence[Any], row: Sequence[Any]) -> Any:
    total = ctx.zero
    for a, b in zip(normal, row):
        total = total + a * b
    return total


def _lp_in_hull(point: Point, vertices: Sequence[Point]) -> bool:
    ctx = context_for([*point.coordinates, *(value for vertex in vertices for value in vertex.coordinates)])
    count = len(vertices)
    equalities = [([vertex[k] for vertex in vertices], point[k]) for k in range(point.dimension)]
    equalities.append(([1] * count, 1))
    result = solve_general(ctx, count, equalities=equalities)
    return result.status is LPStatus.OPTIMAL


def in_hull(point: Point, vertices: Sequence[Point]) -> bool:
    """True iff the point is a convex combination of the vertices (closed hull)."""

    if not vertices:
        raise DimensionMismatchError("in_hull needs at least one vertex")
    check_same_dimension([point, *vertices])
    if point.is_rational and all(vertex.is_rational for vertex in vertices):
        return RationalHull(vertices).contains(point)
    return _lp_in_hull(point, vertices)


def strict_convex_position(points: Sequence[Point]) -> bool:
    """Every point is a vertex of the hull of the set."""

    if not points:
        return True
    check_same_dimension(points)
    if len(set(points)) != len(points):
        logger.info("duplicate points rule out strict convex position")
        return False
    if len(points) <= 2:
        return True
    if points[0].dimension == 2 and all(point.is_rational for point in points):
        return len(convex_hull_2d(points)) == len(points)
    for index, point in enumerate(points):
        others = [other for position, other in enumerate(points) if position != index]
        if in_hull(point, others):
            return False
    return True


def affine_rank(points: Sequence[Point]) -> int:
    if len(points) <= 1:
        return 0
    base = points[0]
    rows = [[a - b for a, b in zip(point.coordinates, base.coordinates)] for point in points[1:]]
    ctx = context_for(value for row in rows for value in row)
    return linalg.rank(ctx, rows)

