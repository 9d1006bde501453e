from __future__ import annotations

import itertools
import random
from fractions import Fraction

import pytest
from pydantic import TypeAdapter, ValidationError

from app.core.errors import DimensionMismatchError, NotEnumerableError, UnsupportedCoordinateError
from app.geometry.numbers import ExactNumber
from app.geometry.points import Point
from app.models.descriptors import (
    ComplementOfPrimesDescriptor,
    DiscreteDenseProductDescriptor,
    ExplicitFiniteDescriptor,
    LatticeDescriptor,
    LatticeDifferenceDescriptor,
    PrimeGridDescriptor,
    PuncturedSpaceDescriptor,
    QModuleDescriptor,
    SetDescriptor,
    Sublattice,
    UnionDescriptor,
    Window,
)
from app.services import pointsets_service as pointsets


def _even_lattice(dimension: int = 2) -> Sublattice:
    return Sublattice(basis=[[2 * int(i == j) for j in range(dimension)] for i in range(dimension)])


def test_window_parse_and_scan_order() -> None:
    window = Window.parse("0:1, -1:0")
    assert window.lower == [0, -1] and window.upper == [1, 0]
    assert list(window.integer_points()) == [(0, -1), (0, 0), (1, -1), (1, 0)]
    assert str(window) == "0:1,-1:0"
    assert window.size == 4


def test_window_rejects_inverted_bounds() -> None:
    with pytest.raises(ValidationError):
        Window(lower=[2], upper=[1])


def test_descriptor_json_uses_kind_discriminator() -> None:
    adapter = TypeAdapter(SetDescriptor)
    descriptor = adapter.validate_python(
        {"kind": "lattice_difference", "dimension": 2, "removed": [{"basis": [[2, 0], [0, 2]]}]}
    )
    assert isinstance(descriptor, LatticeDifferenceDescriptor)
    assert descriptor.removed[0].translate == [0, 0]
    assert descriptor.removed[0].index == 4


def test_symbolic_descriptor_json_round_trip() -> None:
    adapter = TypeAdapter(SetDescriptor)
    descriptor = DiscreteDenseProductDescriptor(
        integer_dimension=2, dense_generators=["1", {"pi": "1"}, {"e": "1/2", "1": "3"}]
    )
    assert descriptor.dense_generators[1] == ExactNumber.label("pi")
    assert descriptor.dense_generators[2] == ExactNumber.label("e", Fraction(1, 2)) + 3
    payload = adapter.dump_json(descriptor)
    assert adapter.validate_json(payload) == descriptor
    module = QModuleDescriptor(generators=[[{"pi": "1"}, "0"], ["0", {"sqrt2": "1"}]])
    assert adapter.validate_json(adapter.dump_json(module)) == module


def test_removing_the_whole_lattice_is_rejected() -> None:
    with pytest.raises(ValidationError):
        LatticeDifferenceDescriptor(dimension=2, removed=[Sublattice(basis=[[1, 0], [0, 1]])])


def test_dense_generators_must_be_rationally_independent() -> None:
    with pytest.raises(ValidationError):
        DiscreteDenseProductDescriptor(integer_dimension=1, dense_generators=["1", "1/2"])


def test_lattice_difference_membership() -> None:
    descriptor = LatticeDifferenceDescriptor(dimension=2, removed=[_even_lattice()])
    assert pointsets.contains(descriptor, Point((1, 0)))
    assert not pointsets.contains(descriptor, Point((2, -4)))
    assert not pointsets.contains(descriptor, Point((Fraction(1, 2), 1)))


def test_translated_sublattice_membership() -> None:
    odd = Sublattice(basis=[[2]], translate=[1])
    assert pointsets.lattice_contains(odd, (5,))
    assert not pointsets.lattice_contains(odd, (4,))


def test_prime_grid_and_complement() -> None:
    assert pointsets.contains(PrimeGridDescriptor(dimension=2), Point((2, 7)))
    assert not pointsets.contains(PrimeGridDescriptor(dimension=2), Point((2, 9)))
    assert pointsets.contains(ComplementOfPrimesDescriptor(dimension=1), Point((9,)))
    assert not pointsets.contains(ComplementOfPrimesDescriptor(dimension=1), Point((11,)))


def test_discrete_sets_reject_symbolic_points() -> None:
    with pytest.raises(UnsupportedCoordinateError):
        pointsets.contains(LatticeDescriptor.standard(1), Point((ExactNumber.label("pi"),)))


def test_membership_dimension_mismatch() -> None:
    with pytest.raises(DimensionMismatchError):
        pointsets.contains(LatticeDescriptor.standard(2), Point((1,)))


def test_punctured_space_membership() -> None:
    descriptor = PuncturedSpaceDescriptor(dimension=2, excluded=[["0", "0"]])
    assert not pointsets.contains(descriptor, Point((0, 0)))
    assert pointsets.contains(descriptor, Point((ExactNumber.label("pi"), 0)))


def test_q_module_membership_solves_one_combination() -> None:
    descriptor = QModuleDescriptor(generators=[[{"pi": "1"}, "0"], ["0", {"e": "1"}]])
    pi, e = ExactNumber.label("pi"), ExactNumber.label("e")
    assert pointsets.contains(descriptor, Point((pi / 3, e * 2)))
    assert not pointsets.contains(descriptor, Point((e, 0)))
    assert not pointsets.contains(descriptor, Point((1, 0)))


def test_dense_group_membership_is_integral() -> None:
    generators = [Fraction(1), ExactNumber.label("pi")]
    assert pointsets.dense_group_contains(generators, ExactNumber.label("pi") * 3 - 2)
    assert not pointsets.dense_group_contains(generators, Fraction(1, 2))
    assert not pointsets.dense_group_contains(generators, ExactNumber.label("e"))


def test_discrete_dense_product_membership() -> None:
    descriptor = DiscreteDenseProductDescriptor(integer_dimension=1, dense_generators=["1", {"pi": "1"}])
    assert pointsets.contains(descriptor, Point((2, ExactNumber.label("pi") + 1)))
    assert not pointsets.contains(descriptor, Point((Fraction(1, 2), 0)))


def test_enumerate_lattice_difference_window() -> None:
    descriptor = LatticeDifferenceDescriptor(dimension=2, removed=[_even_lattice()])
    points = pointsets.enumerate_window(descriptor, Window.cube(2, 0, 2))
    assert len(points) == 9 - 4
    assert points == sorted(points)
    assert Point((0, 0)) not in points


def test_enumerate_prime_grid_window() -> None:
    points = pointsets.enumerate_window(PrimeGridDescriptor(dimension=2), Window.cube(2, 0, 5))
    assert points == [Point((a, b)) for a in (2, 3, 5) for b in (2, 3, 5)]


def test_enumerate_union_merges_parts() -> None:
    first = ExplicitFiniteDescriptor(points=[["0", "0"], ["3", "3"]])
    second = ExplicitFiniteDescriptor(points=[["1", "1"], ["0", "0"]])
    union = UnionDescriptor(parts=[first, second])
    assert pointsets.enumerate_window(union, Window.cube(2, 0, 2)) == [Point((0, 0)), Point((1, 1))]


def test_dense_sets_are_not_enumerable() -> None:
    with pytest.raises(NotEnumerableError):
        pointsets.enumerate_window(PuncturedSpaceDescriptor(dimension=1), Window.cube(1, 0, 1))


def test_parity_class_decides_integer_midpoints() -> None:
    generator = random.Random(17)
    for _ in range(30):
        rows: set[tuple[int, int]] = set()
        while len(rows) < 5:
            rows.add((generator.randint(-20, 20), generator.randint(-20, 20)))
        points = [Point(row) for row in rows]
        classes = [pointsets.parity_class(point) for point in points]
        assert len(set(classes)) < len(classes)
        for a, b in itertools.combinations(points, 2):
            integral = (a + b).scale(Fraction(1, 2)).is_integer
            assert integral == (pointsets.parity_class(a) == pointsets.parity_class(b))


def test_lattice_membership_is_symmetric_about_the_translate() -> None:
    generator = random.Random(19)
    for _ in range(20):
        a, c, b = generator.randint(1, 3), generator.randint(1, 3), generator.randint(-3, 3)
        translate = [generator.randint(-2, 2), generator.randint(-2, 2)]
        lattice = LatticeDescriptor(basis=[[a, b], [0, c]], translate=translate)
        step = Point((b, c))
        for _ in range(20):
            point = Point((generator.randint(-8, 8), generator.randint(-8, 8)))
            mirrored = Point(2 * shift - value for shift, value in zip(translate, point.coordinates))
            member = pointsets.contains(lattice, point)
            assert pointsets.contains(lattice, mirrored) == member
            assert pointsets.contains(lattice, point + step) == member


def test_enumerate_window_matches_membership() -> None:
    window = Window.cube(2, -3, 4)
    descriptors: list[SetDescriptor] = [
        LatticeDescriptor(basis=[[2, 1], [0, 3]], translate=[1, 0]),
        LatticeDifferenceDescriptor(dimension=2, removed=[_even_lattice(), Sublattice(basis=[[3, 0], [0, 3]])]),
        PrimeGridDescriptor(dimension=2),
        ComplementOfPrimesDescriptor(dimension=2),
    ]
    for descriptor in descriptors:
        members = [Point(row) for row in window.integer_points() if pointsets.contains(descriptor, Point(row))]
        assert pointsets.enumerate_window(descriptor, window) == members
