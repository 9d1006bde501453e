from __future__ import annotations

import random
from fractions import Fraction

import pytest

from app.core.errors import DimensionMismatchError
from app.geometry.lp import LPStatus, lp_optimize
from app.geometry.numbers import ExactNumber
from app.geometry.points import HalfSpace, Point
from app.geometry.predicates import (
    affine_rank,
    convex_hull_2d,
    hull_facets,
    in_hull,
    orientation,
    strict_convex_position,
)
from app.geometry.scalars import RATIONAL


def _points(*rows: tuple[int, ...]) -> list[Point]:
    return [Point(row) for row in rows]


def test_orientation_signs() -> None:
    assert orientation(_points((0, 0), (1, 0), (0, 1))) == 1
    assert orientation(_points((0, 0), (0, 1), (1, 0))) == -1
    assert orientation(_points((0, 0), (1, 1), (2, 2))) == 0


def test_orientation_with_symbolic_coordinate() -> None:
    pi = ExactNumber.label("pi")
    points = [Point((0, 0)), Point((1, 0)), Point((Fraction(1, 2), pi - 3))]
    assert orientation(points) == 1


def test_orientation_needs_d_plus_one_points() -> None:
    with pytest.raises(DimensionMismatchError):
        orientation(_points((0, 0), (1, 0)))


def test_hull_drops_interior_and_collinear_points() -> None:
    hull = convex_hull_2d(_points((0, 0), (2, 0), (1, 0), (2, 2), (0, 2), (1, 1)))
    assert hull == _points((0, 0), (2, 0), (2, 2), (0, 2))


def test_in_hull_is_closed() -> None:
    square = _points((0, 0), (2, 0), (2, 2), (0, 2))
    assert in_hull(Point((1, 0)), square)
    assert in_hull(Point((1, 1)), square)
    assert not in_hull(Point((3, 1)), square)


def test_in_hull_symbolic_point_uses_exact_lp() -> None:
    pi = ExactNumber.label("pi")
    square = _points((0, 0), (4, 0), (4, 4), (0, 4))
    assert in_hull(Point((pi, 1)), square)
    assert not in_hull(Point((pi + 1, 1)), square)


def test_strict_convex_position() -> None:
    assert strict_convex_position(_points((0, 0), (1, 0), (1, 1), (0, 1)))
    assert not strict_convex_position(_points((0, 0), (2, 0), (1, 0)))
    assert not strict_convex_position(_points((0, 0), (0, 0)))
    assert strict_convex_position(_points((0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)))
    assert not strict_convex_position(_points((0, 0, 0), (2, 0, 0), (0, 2, 0), (0, 0, 2), (0, 0, 1)))


def test_affine_rank() -> None:
    assert affine_rank(_points((0, 0), (1, 1), (2, 2))) == 1
    assert affine_rank(_points((0, 0, 0), (1, 0, 0), (0, 1, 0))) == 2


def test_hull_facets_of_a_tetrahedron() -> None:
    facets = hull_facets(RATIONAL, _points((0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)))
    assert facets is not None
    assert len(facets) == 4
    assert ((1, 0, 0), 0) in facets
    assert ((-1, -1, -1), -1) in facets


def test_hull_facets_flat_set_returns_none() -> None:
    assert hull_facets(RATIONAL, _points((0, 0, 0), (1, 0, 0), (0, 1, 0))) is None


def test_lp_optimize_over_a_triangle() -> None:
    triangle = [HalfSpace((-1, 0), 0), HalfSpace((0, -1), 0), HalfSpace((1, 1), 2)]
    result = lp_optimize(triangle, [1, 2], "max")
    assert result.status is LPStatus.OPTIMAL
    assert result.value == 4
    assert result.point == Point((0, 2))


def test_lp_optimize_detects_unbounded_and_infeasible() -> None:
    quadrant = [HalfSpace((-1, 0), 0), HalfSpace((0, -1), 0)]
    assert lp_optimize(quadrant, [1, 0]).status is LPStatus.UNBOUNDED
    empty = [HalfSpace((1, 0), -1), HalfSpace((-1, 0), -1)]
    assert lp_optimize(empty, [0, 0]).status is LPStatus.INFEASIBLE


def test_lp_with_symbolic_offset() -> None:
    pi = ExactNumber.label("pi")
    box = [HalfSpace((1,), pi), HalfSpace((-1,), 0)]
    result = lp_optimize(box, [1], "max")
    assert result.status is LPStatus.OPTIMAL
    assert result.value == pi


def test_orientation_is_antisymmetric() -> None:
    generator = random.Random(3)
    for dimension in (2, 3):
        for _ in range(40):
            points = [Point(generator.randint(-9, 9) for _ in range(dimension)) for _ in range(dimension + 1)]
            sign = orientation(points)
            assert orientation([points[1], points[0], *points[2:]]) == -sign
            assert orientation([*points[:-2], points[-1], points[-2]]) == -sign


def _edges(polygon: list[Point]) -> list[HalfSpace]:
    """Outward half-planes of a counter-clockwise polygon."""

    halfspaces = []
    for index, start in enumerate(polygon):
        end = polygon[(index + 1) % len(polygon)]
        normal = (end[1] - start[1], start[0] - end[0])
        halfspaces.append(HalfSpace(normal, normal[0] * start[0] + normal[1] * start[1]))
    return halfspaces


def test_lp_optimize_matches_the_best_vertex() -> None:
    generator = random.Random(5)
    checked = 0
    while checked < 20:
        polygon = convex_hull_2d([Point((generator.randint(-6, 6), generator.randint(-6, 6))) for _ in range(8)])
        if len(polygon) < 3:
            continue
        objective = [generator.randint(-5, 5), generator.randint(-5, 5)]
        values = [objective[0] * vertex[0] + objective[1] * vertex[1] for vertex in polygon]
        for direction, expected in (("max", max(values)), ("min", min(values))):
            result = lp_optimize(_edges(polygon), objective, direction)
            assert result.status is LPStatus.OPTIMAL
            assert result.value == expected
            assert in_hull(result.point, polygon)
        checked += 1
