"""Membership, discreteness and window enumeration for set descriptors."""

from __future__ import annotations

import itertools
import logging
import math
from collections.abc import Sequence
from fractions import Fraction
from functools import lru_cache
from typing import Any

from sympy import Matrix, isprime, primerange
from sympy.matrices.normalforms import hermite_normal_form

from app.core.errors import (
    DimensionMismatchError,
    NotEnumerableError,
    UnsupportedCoordinateError,
)
from app.geometry import linalg
from app.geometry.numbers import ExactNumber, Scalar, SymbolicBasis, as_exact
from app.geometry.points import Point
from app.geometry.scalars import RATIONAL, context_for
from app.models.descriptors import (
    ComplementOfPrimesDescriptor,
    DiscreteDenseProductDescriptor,
    ExplicitFiniteDescriptor,
    LatticeDescriptor,
    LatticeDifferenceDescriptor,
    MixedIntegerDescriptor,
    PrimeGridDescriptor,
    ProductDescriptor,
    PuncturedSpaceDescriptor,
    QModuleDescriptor,
    RationalSpaceDescriptor,
    SetDescriptor,
    Sublattice,
    UnionDescriptor,
    Window,
    descriptor_dimension,
)

logger = logging.getLogger(__name__)

_DISCRETE_KINDS = {"lattice", "lattice_difference", "prime_grid", "complement_of_primes", "explicit_finite"}


def is_discrete(descriptor: SetDescriptor) -> bool:
    if isinstance(descriptor, UnionDescriptor):
        return all(is_discrete(part) for part in descriptor.parts)
    if isinstance(descriptor, ProductDescriptor):
        return is_discrete(descriptor.left) and is_discrete(descriptor.right)
    return descriptor.kind in _DISCRETE_KINDS


def parity_class(point: Point) -> tuple[int, ...]:
    return tuple(value % 2 for value in point.integer_coordinates())


def is_integer_value(value: Scalar) -> bool:
    return isinstance(value, Fraction) and value.denominator == 1


@lru_cache(maxsize=256)
def _inverse(basis: tuple[tuple[int, ...], ...]) -> tuple[tuple[Fraction, ...], ...]:
    inverse = Matrix(basis).inv()
    return tuple(
        tuple(Fraction(int(value.p), int(value.q)) for value in inverse.row(row))
        for row in range(inverse.rows)
    )


def lattice_contains(lattice: Sublattice, coordinates: Sequence[int]) -> bool:
    inverse = _inverse(tuple(tuple(row) for row in lattice.basis))
    shifted = [Fraction(value - offset) for value, offset in zip(coordinates, lattice.translate)]
    return all(sum(a * b for a, b in zip(row, shifted)).denominator == 1 for row in inverse)


def removed_index(descriptor: LatticeDifferenceDescriptor, coordinates: Sequence[int]) -> int | None:
    """Lowest index of a removed sublattice containing the integer point."""

    for position, lattice in enumerate(descriptor.removed):
        if lattice_contains(lattice, coordinates):
            return position
    return None


def _rational_point(descriptor: SetDescriptor, point: Point) -> None:
    if not point.is_rational:
        raise UnsupportedCoordinateError(f"{descriptor.kind} descriptors take rational coordinates only")


def contains(descriptor: SetDescriptor, point: Point) -> bool:
    """Exact membership of the point in S."""

    if point.dimension != descriptor_dimension(descriptor):
        raise DimensionMismatchError(
            f"Point of dimension {point.dimension} tested against a set in dimension "
            f"{descriptor_dimension(descriptor)}"
        )
    if isinstance(descriptor, UnionDescriptor):
        return any(contains(part, point) for part in descriptor.parts)
    if isinstance(descriptor, ProductDescriptor):
        split = descriptor_dimension(descriptor.left)
        return contains(descriptor.left, Point(point.coordinates[:split])) and contains(
            descriptor.right, Point(point.coordinates[split:])
        )
    if isinstance(descriptor, PuncturedSpaceDescriptor):
        return point not in descriptor.excluded
    if isinstance(descriptor, QModuleDescriptor):
        return _q_module_contains(descriptor, point)
    if isinstance(descriptor, DiscreteDenseProductDescriptor):
        head = point.coordinates[: descriptor.integer_dimension]
        if not all(is_integer_value(value) for value in head):
            return False
        return dense_group_contains(descriptor.dense_generators, point.coordinates[-1])
    if isinstance(descriptor, RationalSpaceDescriptor):
        return point.is_rational
    if isinstance(descriptor, MixedIntegerDescriptor):
        discrete = descriptor.dimension - descriptor.continuous
        return all(is_integer_value(value) for value in point.coordinates[:discrete])

    _rational_point(descriptor, point)
    if isinstance(descriptor, ExplicitFiniteDescriptor):
        return point in descriptor.points
    if not point.is_integer:
        return False
    coordinates = point.integer_coordinates()
    if isinstance(descriptor, LatticeDescriptor):
        return lattice_contains(descriptor, coordinates)
    if isinstance(descriptor, LatticeDifferenceDescriptor):
        return removed_index(descriptor, coordinates) is None
    if isinstance(descriptor, PrimeGridDescriptor):
        return all(isprime(value) for value in coordinates)
    if isinstance(descriptor, ComplementOfPrimesDescriptor):
        return not any(isprime(value) for value in coordinates)
    raise UnsupportedCoordinateError(f"No membership rule for {descriptor.kind}")


def _labels_of(values: Sequence[Scalar]) -> SymbolicBasis:
    return SymbolicBasis.of(
        label for value in values if isinstance(value, ExactNumber) for label in value.basis.labels
    )


def _q_module_contains(descriptor: QModuleDescriptor, point: Point) -> bool:
    # One row per (label, coordinate): a single rational combination must match every label.
    values = [*point.coordinates, *(value for generator in descriptor.generators for value in generator)]
    basis = _labels_of(values)
    matrix: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    for label_index in range(len(basis.names)):
        for axis in range(point.dimension):
            matrix.append(
                [as_exact(generator[axis]).over(basis).coefficients[label_index] for generator in descriptor.generators]
            )
            rhs.append(as_exact(point[axis]).over(basis).coefficients[label_index])
    return linalg.solve(RATIONAL, matrix, rhs) is not None


def module_slice(descriptor: QModuleDescriptor, anchor: Point, directions: Sequence[Point]) -> tuple[Point | None, int]:
    """Meet of the module with the affine plane anchor + span(directions).

    Returns one module point on the plane (None when they are disjoint) and the real rank
    of the module vectors parallel to the plane. The meet is dense in the plane exactly
    when that rank equals the number of independent directions.
    """

    generators = descriptor.generators
    values = [
        *anchor.coordinates,
        *(value for direction in directions for value in direction.coordinates),
        *(value for generator in generators for value in generator.coordinates),
    ]
    ctx = context_for(values)
    rows = [[ctx.coerce(value) for value in direction.coordinates] for direction in directions]
    normals = linalg.nullspace(ctx, rows, width=descriptor.dimension)

    def functionals(point: Point) -> list[ExactNumber]:
        images = []
        for normal in normals:
            total = ctx.zero
            for weight, value in zip(normal, point.coordinates):
                total = total + weight * ctx.coerce(value)
            images.append(as_exact(ctx.demote(total)))
        return images

    target = functionals(anchor)
    images = [functionals(generator) for generator in generators]
    basis = _labels_of([*target, *(value for image in images for value in image)])
    # One row per (label, normal): a rational combination of generators fixed on every normal.
    matrix: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    for label_index in range(len(basis.names)):
        for row in range(len(normals)):
            matrix.append([image[row].over(basis).coefficients[label_index] for image in images])
            rhs.append(target[row].over(basis).coefficients[label_index])
    parallel = [_combination(generators, weights) for weights in linalg.nullspace(RATIONAL, matrix, len(generators))]
    if matrix:
        solution = linalg.solve(RATIONAL, matrix, rhs)
        point = None if solution is None else _combination(generators, solution)
    else:
        point = Point([0] * descriptor.dimension)
    if not parallel:
        return point, 0
    span = context_for(value for vector in parallel for value in vector.coordinates)
    rank = linalg.rank(span, [[span.coerce(value) for value in vector.coordinates] for vector in parallel])
    logger.debug("module meets a %d-flat with parallel rank %d", len(directions), rank)
    return point, rank


def _combination(generators: Sequence[Point], weights: Sequence[Fraction]) -> Point:
    total = Point([0] * generators[0].dimension)
    for generator, weight in zip(generators, weights):
        total = total + generator.scale(weight)
    return total


@lru_cache(maxsize=64)
def _group_basis(generators: tuple[Any, ...], labels: tuple[str, ...]) -> tuple[int, list[list[int]]]:
    """Common denominator and a Z-basis (columns) of the scaled generator group."""

    basis = SymbolicBasis.of(labels)
    vectors = [as_exact(value).over(basis).coefficients for value in generators]
    denominator = math.lcm(*(value.denominator for vector in vectors for value in vector))
    columns = Matrix([[int(vector[row] * denominator) for vector in vectors] for row in range(len(basis.names))])
    reduced = hermite_normal_form(columns)
    return denominator, [[int(reduced[row, column]) for column in range(reduced.cols)] for row in range(reduced.rows)]


def dense_group_contains(generators: Sequence[Scalar], value: Scalar) -> bool:
    """Is the value an integer combination of the generators?"""

    basis = _labels_of([*generators, value])
    denominator, columns = _group_basis(tuple(generators), basis.labels)
    target = [coefficient * denominator for coefficient in as_exact(value).over(basis).coefficients]
    solution = linalg.solve(RATIONAL, columns, target)
    if solution is None:
        return False
    return all(entry.denominator == 1 for entry in solution)


def enumerate_window(descriptor: SetDescriptor, window: Window) -> list[Point]:
    """Points of S in the closed window, in lexicographic order."""

    dimension = descriptor_dimension(descriptor)
    if window.dimension != dimension:
        raise DimensionMismatchError(f"Window of dimension {window.dimension} for a set in dimension {dimension}")
    if not is_discrete(descriptor):
        raise NotEnumerableError(f"{descriptor.kind} is not discrete and cannot be enumerated")
    if isinstance(descriptor, ExplicitFiniteDescriptor):
        return sorted(point for point in descriptor.points if window.contains(point))
    if isinstance(descriptor, UnionDescriptor):
        merged = {point for part in descriptor.parts for point in enumerate_window(part, window)}
        return sorted(merged)
    if isinstance(descriptor, ProductDescriptor):
        split = descriptor_dimension(descriptor.left)
        left = enumerate_window(descriptor.left, Window(lower=window.lower[:split], upper=window.upper[:split]))
        right = enumerate_window(descriptor.right, Window(lower=window.lower[split:], upper=window.upper[split:]))
        return [Point((*a.coordinates, *b.coordinates)) for a in left for b in right]
    if isinstance(descriptor, (PrimeGridDescriptor, ComplementOfPrimesDescriptor)):
        axes = []
        for low, high in zip(window.lower, window.upper):
            primes = list(primerange(max(low, 2), high + 1)) if high >= 2 else []
            if isinstance(descriptor, PrimeGridDescriptor):
                axes.append(primes)
            else:
                prime_set = set(primes)
                axes.append([value for value in range(low, high + 1) if value not in prime_set])
        return [Point(coordinates) for coordinates in itertools.product(*axes)]
    points = [Point(coordinates) for coordinates in window.integer_points() if contains(descriptor, Point(coordinates))]
    logger.debug("enumerated %d points of %s in %s", len(points), descriptor.kind, window)
    return points

