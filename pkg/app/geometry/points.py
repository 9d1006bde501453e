"""Points and half-spaces with exact coordinates."""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Sequence
from fractions import Fraction

from app.core.errors import DimensionMismatchError, NonIntegerPointError
from app.geometry.numbers import Scalar, format_exact, is_rational, normalize, sign


class Point:
    """Immutable point; rational coordinates are kept as Fractions."""

    __slots__ = ("coordinates", "_hash")

    def __init__(self, coordinates: Iterable[Scalar | int]) -> None:
        self.coordinates: tuple[Scalar, ...] = tuple(normalize(value) for value in coordinates)
        if not self.coordinates:
            raise DimensionMismatchError("Points need at least one coordinate")
        self._hash: int | None = None

    @classmethod
    def of(cls, *values: Scalar | int | str) -> Point:
        return cls(Fraction(value) if isinstance(value, str) else value for value in values)

    @property
    def dimension(self) -> int:
        return len(self.coordinates)

    @property
    def is_rational(self) -> bool:
        return all(is_rational(value) for value in self.coordinates)

    @property
    def is_integer(self) -> bool:
        return all(isinstance(value, Fraction) and value.denominator == 1 for value in self.coordinates)

    def integer_coordinates(self) -> tuple[int, ...]:
        if not self.is_integer:
            raise NonIntegerPointError(f"{self} is not an integer point")
        return tuple(int(value) for value in self.coordinates)

    def __iter__(self) -> Iterator[Scalar]:
        return iter(self.coordinates)

    def __len__(self) -> int:
        return len(self.coordinates)

    def __getitem__(self, index: int) -> Scalar:
        return self.coordinates[index]

    def __add__(self, other: Point) -> Point:
        _check_dimensions(self, other)
        return Point(a + b for a, b in zip(self.coordinates, other.coordinates))

    def __sub__(self, other: Point) -> Point:
        _check_dimensions(self, other)
        return Point(a - b for a, b in zip(self.coordinates, other.coordinates))

    def scale(self, factor: Fraction | int) -> Point:
        return Point(value * Fraction(factor) for value in self.coordinates)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Point):
            return NotImplemented
        return self.coordinates == other.coordinates

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.coordinates)
        return self._hash

    def __lt__(self, other: Point) -> bool:
        return lex_compare(self, other) < 0

    def __repr__(self) -> str:
        return "Point(" + ", ".join(format_exact(value) for value in self.coordinates) + ")"


def _check_dimensions(first: Point, second: Point) -> None:
    if first.dimension != second.dimension:
        raise DimensionMismatchError(f"Dimensions {first.dimension} and {second.dimension} differ")


def check_same_dimension(points: Sequence[Point]) -> int:
    if not points:
        raise DimensionMismatchError("Empty point list")
    dimension = points[0].dimension
    for point in points[1:]:
        if point.dimension != dimension:
            raise DimensionMismatchError(f"Dimensions {dimension} and {point.dimension} differ")
    return dimension


def lex_compare(first: Point, second: Point) -> int:
    _check_dimensions(first, second)
    for a, b in zip(first.coordinates, second.coordinates):
        if isinstance(a, Fraction) and isinstance(b, Fraction):
            if a != b:
                return -1 if a < b else 1
            continue
        difference = sign(a - b)
        if difference:
            return difference
    return 0


def dot(normal: Sequence[Fraction], point: Point) -> Scalar:
    total: Scalar = Fraction(0)
    for coefficient, value in zip(normal, point.coordinates):
        if coefficient:
            total = total + coefficient * value
    return normalize(total)


class HalfSpace:
    """{x : normal . x <= offset} with a rational normal."""

    __slots__ = ("normal", "offset")

    def __init__(self, normal: Iterable[Fraction | int], offset: Scalar | int) -> None:
        self.normal: tuple[Fraction, ...] = tuple(Fraction(value) for value in normal)
        if all(value == 0 for value in self.normal):
            raise DimensionMismatchError("Half-space normal must be nonzero")
        self.offset: Scalar = normalize(offset)

    @property
    def dimension(self) -> int:
        return len(self.normal)

    def slack(self, point: Point) -> Scalar:
        if point.dimension != self.dimension:
            raise DimensionMismatchError("Half-space and point dimensions differ")
        return normalize(self.offset - dot(self.normal, point))

    def side(self, point: Point) -> int:
        """+1 strictly inside, 0 on the boundary, -1 outside."""

        return sign(self.slack(point))

    def contains(self, point: Point) -> bool:
        return self.side(point) >= 0

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, HalfSpace):
            return NotImplemented
        return self.normal == other.normal and self.offset == other.offset

    def __hash__(self) -> int:
        return hash((self.normal, self.offset))

    def __repr__(self) -> str:
        terms = ", ".join(str(value) for value in self.normal)
        return f"HalfSpace(({terms}) . x <= {format_exact(self.offset)})"

