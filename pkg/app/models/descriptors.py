"""Set descriptors for the structured sets S and integer windows."""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterator, Mapping, Sequence
from fractions import Fraction
from typing import Annotated, Any, Literal, Union

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, PlainSerializer, PlainValidator, model_validator
from sympy import Matrix

from app.geometry import linalg
from app.geometry.numbers import ExactNumber, SymbolicBasis, as_exact, format_rational, normalize, parse_rational
from app.geometry.points import Point
from app.geometry.scalars import RATIONAL


def parse_exact(value: Any) -> Fraction | ExactNumber:
    """Accept "p/q", an int, or a {label: "p/q"} map."""

    if isinstance(value, (Fraction, ExactNumber)):
        return normalize(value)
    if isinstance(value, Mapping):
        return normalize(ExactNumber.from_mapping(value))
    return parse_rational(value)


def dump_exact(value: Fraction | ExactNumber) -> str | dict[str, str]:
    if isinstance(value, ExactNumber) and not value.is_rational:
        return {label: format_rational(coefficient) for label, coefficient in value.to_mapping().items()}
    return format_rational(normalize(value))


def parse_point(value: Any) -> Point:
    if isinstance(value, Point):
        return value
    if isinstance(value, (str, bytes)) or not isinstance(value, Sequence):
        raise ValueError(f"A point must be a list of coordinates, got {value!r}")
    return Point(parse_exact(item) for item in value)


def dump_point(point: Point) -> list[str | dict[str, str]]:
    return [dump_exact(value) for value in point.coordinates]


# Plain validator: pydantic's Fraction validator rejects ExactNumber instances.
ExactValue = Annotated[Any, PlainValidator(parse_exact), PlainSerializer(dump_exact)]
PointValue = Annotated[Point, BeforeValidator(parse_point), PlainSerializer(dump_point)]


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True, extra="forbid")


def _check_points(points: Sequence[Point], *, rational: bool) -> int:
    if not points:
        raise ValueError("At least one point is required")
    dimension = points[0].dimension
    if any(point.dimension != dimension for point in points):
        raise ValueError("Points of different dimensions")
    if rational and not all(point.is_rational for point in points):
        raise ValueError("Points must have rational coordinates")
    if len(set(points)) != len(points):
        raise ValueError("Duplicate points")
    return dimension


class Window(_Frozen):
    """Closed integer box [lower, upper]."""

    lower: list[int]
    upper: list[int]

    @model_validator(mode="after")
    def validate_bounds(self) -> Window:
        if not self.lower or len(self.lower) != len(self.upper):
            raise ValueError("Window bounds must be nonempty and of equal length")
        if any(low > high for low, high in zip(self.lower, self.upper)):
            raise ValueError("Window lower bound exceeds upper bound")
        return self

    @classmethod
    def parse(cls, text: str) -> Window:
        """Parse "x0:x1,y0:y1[,...]" with inclusive integer bounds."""

        lower, upper = [], []
        for part in text.split(","):
            pieces = part.strip().split(":")
            if len(pieces) != 2:
                raise ValueError(f"Window component '{part}' is not of the form lo:hi")
            lower.append(int(pieces[0]))
            upper.append(int(pieces[1]))
        return cls(lower=lower, upper=upper)

    @classmethod
    def cube(cls, dimension: int, low: int, high: int) -> Window:
        return cls(lower=[low] * dimension, upper=[high] * dimension)

    @classmethod
    def bounding(cls, points: Sequence[Point]) -> Window:
        """Smallest integer window containing rational points."""

        dimension = points[0].dimension
        lower = [math.floor(min(point[axis] for point in points)) for axis in range(dimension)]
        upper = [math.ceil(max(point[axis] for point in points)) for axis in range(dimension)]
        return cls(lower=lower, upper=upper)

    @property
    def dimension(self) -> int:
        return len(self.lower)

    @property
    def size(self) -> int:
        return math.prod(high - low + 1 for low, high in zip(self.lower, self.upper))

    def contains(self, point: Point) -> bool:
        return all(low <= value <= high for low, value, high in zip(self.lower, point.coordinates, self.upper))

    def integer_points(self) -> Iterator[tuple[int, ...]]:
        """Lexicographic scan of the integer points."""

        ranges = [range(low, high + 1) for low, high in zip(self.lower, self.upper)]
        return itertools.product(*ranges)

    def __str__(self) -> str:
        return ",".join(f"{low}:{high}" for low, high in zip(self.lower, self.upper))


def _determinant(basis: list[list[int]]) -> int:
    size = len(basis)
    if size == 0 or any(len(row) != size for row in basis):
        raise ValueError("Lattice basis must be a nonempty square matrix")
    return int(Matrix(basis).det())


class Sublattice(_Frozen):
    """{basis . z + translate : z integer}; the columns of ``basis`` generate the lattice."""

    basis: list[list[int]]
    translate: list[int] = Field(default_factory=list)

    @model_validator(mode="before")
    @classmethod
    def default_translate(cls, data: Any) -> Any:
        if isinstance(data, dict) and not data.get("translate") and data.get("basis"):
            data = {**data, "translate": [0] * len(data["basis"])}
        return data

    @model_validator(mode="after")
    def validate_basis(self) -> Sublattice:
        if _determinant(self.basis) == 0:
            raise ValueError("Lattice basis is singular")
        if len(self.translate) != len(self.basis):
            raise ValueError("Translate length differs from lattice dimension")
        return self

    @property
    def dimension(self) -> int:
        return len(self.basis)

    @property
    def index(self) -> int:
        """Index of the lattice in Z^d."""

        return abs(_determinant(self.basis))


class LatticeDescriptor(Sublattice):
    kind: Literal["lattice"] = "lattice"

    @classmethod
    def standard(cls, dimension: int) -> LatticeDescriptor:
        return cls(basis=[[int(i == j) for j in range(dimension)] for i in range(dimension)])


class LatticeDifferenceDescriptor(_Frozen):
    """Z^d minus a union of proper, possibly translated sublattices."""

    kind: Literal["lattice_difference"] = "lattice_difference"
    dimension: int = Field(ge=1)
    removed: list[Sublattice] = Field(min_length=1)

    @model_validator(mode="after")
    def validate_removed(self) -> LatticeDifferenceDescriptor:
        for position, lattice in enumerate(self.removed):
            if lattice.dimension != self.dimension:
                raise ValueError(f"Removed lattice {position} has the wrong dimension")
            if lattice.index == 1:
                raise ValueError(f"Removed lattice {position} is all of Z^d, not a proper sublattice")
        return self


class PrimeGridDescriptor(_Frozen):
    kind: Literal["prime_grid"] = "prime_grid"
    dimension: int = Field(ge=1)


class ComplementOfPrimesDescriptor(_Frozen):
    """Integer points none of whose coordinates is prime."""

    kind: Literal["complement_of_primes"] = "complement_of_primes"
    dimension: int = Field(ge=1)


class ExplicitFiniteDescriptor(_Frozen):
    kind: Literal["explicit_finite"] = "explicit_finite"
    points: list[PointValue]

    @model_validator(mode="after")
    def validate_points(self) -> ExplicitFiniteDescriptor:
        _check_points(self.points, rational=True)
        return self

    @property
    def dimension(self) -> int:
        return self.points[0].dimension


class PuncturedSpaceDescriptor(_Frozen):
    """R^d minus finitely many rational points."""

    kind: Literal["punctured_space"] = "punctured_space"
    dimension: int = Field(ge=1)
    excluded: list[PointValue] = Field(default_factory=list)

    @model_validator(mode="after")
    def validate_excluded(self) -> PuncturedSpaceDescriptor:
        if self.excluded:
            if _check_points(self.excluded, rational=True) != self.dimension:
                raise ValueError("Excluded points have the wrong dimension")
        return self


class DiscreteDenseProductDescriptor(_Frozen):
    """Z^m times the additive group generated by ``dense_generators``."""

    kind: Literal["discrete_dense_product"] = "discrete_dense_product"
    integer_dimension: int = Field(ge=1)
    dense_generators: list[ExactValue] = Field(min_length=2)

    @model_validator(mode="after")
    def validate_generators(self) -> DiscreteDenseProductDescriptor:
        if rational_rank(self.dense_generators) < 2:
            raise ValueError("Dense generators need at least two Q-independent elements")
        return self

    @property
    def dimension(self) -> int:
        return self.integer_dimension + 1


class QModuleDescriptor(_Frozen):
    """The Q-span of finitely many points with symbolic coordinates."""

    kind: Literal["q_module"] = "q_module"
    generators: list[PointValue]

    @model_validator(mode="after")
    def validate_generators(self) -> QModuleDescriptor:
        _check_points(self.generators, rational=False)
        return self

    @property
    def dimension(self) -> int:
        return self.generators[0].dimension


class MixedIntegerDescriptor(_Frozen):
    """Z^(d-k) x R^k; carried for the bound table only."""

    kind: Literal["mixed_integer"] = "mixed_integer"
    dimension: int = Field(ge=1)
    continuous: int = Field(ge=0)

    @model_validator(mode="after")
    def validate_split(self) -> MixedIntegerDescriptor:
        if self.continuous > self.dimension:
            raise ValueError("More continuous coordinates than the dimension")
        return self


class RationalSpaceDescriptor(_Frozen):
    """Q^d, the d-fold product of a proper subfield of R."""

    kind: Literal["rational_space"] = "rational_space"
    dimension: int = Field(ge=1)


class UnionDescriptor(_Frozen):
    kind: Literal["union"] = "union"
    parts: list[SetDescriptor] = Field(min_length=2)

    @model_validator(mode="after")
    def validate_parts(self) -> UnionDescriptor:
        if len({descriptor_dimension(part) for part in self.parts}) != 1:
            raise ValueError("Union parts live in different dimensions")
        return self

    @property
    def dimension(self) -> int:
        return descriptor_dimension(self.parts[0])


class ProductDescriptor(_Frozen):
    kind: Literal["product"] = "product"
    left: SetDescriptor
    right: SetDescriptor

    @property
    def dimension(self) -> int:
        return descriptor_dimension(self.left) + descriptor_dimension(self.right)


SetDescriptor = Annotated[
    Union[
        LatticeDescriptor,
        LatticeDifferenceDescriptor,
        PrimeGridDescriptor,
        ComplementOfPrimesDescriptor,
        ExplicitFiniteDescriptor,
        PuncturedSpaceDescriptor,
        DiscreteDenseProductDescriptor,
        QModuleDescriptor,
        MixedIntegerDescriptor,
        RationalSpaceDescriptor,
        UnionDescriptor,
        ProductDescriptor,
    ],
    Field(discriminator="kind"),
]

UnionDescriptor.model_rebuild()
ProductDescriptor.model_rebuild()


class DescriptorFile(_Frozen):
    """Versioned on-disk wrapper around one descriptor."""

    version: int = 1
    descriptor: SetDescriptor


def descriptor_dimension(descriptor: Any) -> int:
    return int(descriptor.dimension)


def rational_rank(values: Sequence[Fraction | ExactNumber]) -> int:
    """Dimension of the Q-span of the values."""

    labels = SymbolicBasis.of(
        label for value in values if isinstance(value, ExactNumber) for label in value.basis.labels
    )
    rows = [as_exact(value).over(labels).coefficients for value in values]
    return linalg.rank(RATIONAL, rows)
