from __future__ import annotations

import random
from fractions import Fraction

import pytest

from app.core.config import Settings
from app.core.errors import BudgetExceededError, UnboundedPolytopeError, UndecidableError
from app.geometry.numbers import ExactNumber
from app.geometry.points import HalfSpace, Point
from app.models.descriptors import (
    DiscreteDenseProductDescriptor,
    LatticeDescriptor,
    LatticeDifferenceDescriptor,
    MixedIntegerDescriptor,
    PuncturedSpaceDescriptor,
    QModuleDescriptor,
    Sublattice,
)
from app.models.schemas import (
    ColoredInstance,
    DimensionAtLeast,
    LatticeCount,
    LatticeDifferenceCount,
    MeetsSet,
    Polytope,
)
from app.services.colorful_service import ColorfulService

Z1 = MeetsSet(descriptor=LatticeDescriptor.standard(1))
Z2 = MeetsSet(descriptor=LatticeDescriptor.standard(2))


def _build_service(**overrides: object) -> ColorfulService:
    return ColorfulService(settings=Settings(**overrides))


def _box(lower: list[object], upper: list[object]) -> Polytope:
    dimension = len(lower)
    halfspaces = []
    for axis in range(dimension):
        unit = [int(position == axis) for position in range(dimension)]
        halfspaces.append(HalfSpace(unit, Fraction(upper[axis])))
        halfspaces.append(HalfSpace([-value for value in unit], -Fraction(lower[axis])))
    return Polytope(halfspaces=halfspaces)


def _polytope(*rows: tuple[int, int, int]) -> Polytope:
    return Polytope(halfspaces=[HalfSpace((a, b), c) for a, b, c in rows])


# The unit square minus one corner, for each corner.
TRIANGLES = [
    _polytope((1, 0, 1), (0, 1, 1), (-1, -1, -1)),
    _polytope((-1, 0, 0), (0, 1, 1), (1, -1, 0)),
    _polytope((-1, 0, 0), (0, -1, 0), (1, 1, 1)),
    _polytope((0, -1, 0), (1, 0, 1), (-1, 1, 0)),
]


def test_meets_lattice() -> None:
    service = _build_service()
    quarter = Fraction(1, 4)
    assert not service.eval_property(Z2, _box([quarter, quarter], [3 * quarter, 3 * quarter]))
    assert service.eval_property(Z2, _box([quarter, quarter], [5 * quarter, 5 * quarter]))


def test_lattice_count_and_dimension() -> None:
    service = _build_service()
    segment = _box([0, 0], [1, 0])
    assert service.eval_property(LatticeCount(count=2), segment)
    assert not service.eval_property(LatticeCount(count=3), segment)
    assert service.eval_property(DimensionAtLeast(minimum=2), _box([0, 0], [1, 1]))
    assert not service.eval_property(DimensionAtLeast(minimum=2), segment)
    assert service.eval_property(DimensionAtLeast(minimum=1), segment)


def test_empty_intersection_fails_every_property() -> None:
    service = _build_service()
    empty = _box([0, 0], [1, 1]).intersect(_box([2, 2], [3, 3]))
    for prop in (Z2, LatticeCount(count=1), DimensionAtLeast(minimum=0)):
        assert not service.eval_property(prop, empty)


def test_unbounded_polytope_is_rejected() -> None:
    with pytest.raises(UnboundedPolytopeError):
        _build_service().eval_property(Z2, _polytope((1, 0, 1), (0, 1, 1)))


def test_lattice_difference_count() -> None:
    descriptor = LatticeDifferenceDescriptor(dimension=2, removed=[Sublattice(basis=[[2, 0], [0, 2]])])
    service = _build_service()
    square = _box([0, 0], [1, 1])
    assert service.eval_property(LatticeDifferenceCount(descriptor=descriptor, count=3), square)
    assert not service.eval_property(LatticeDifferenceCount(descriptor=descriptor, count=4), square)


def test_meets_dense_sets() -> None:
    service = _build_service()
    punctured = MeetsSet(descriptor=PuncturedSpaceDescriptor(dimension=2, excluded=[["0", "0"]]))
    assert service.eval_property(punctured, _box([-1, -1], [1, 1]))
    assert not service.eval_property(punctured, _box([0, 0], [0, 0]))
    assert service.eval_property(punctured, _box([0, 0], [1, 0]))

    group = MeetsSet(
        descriptor=DiscreteDenseProductDescriptor(integer_dimension=1, dense_generators=["1", {"pi": "1"}])
    )
    half = Fraction(1, 2)
    assert not service.eval_property(group, _box([0, half], [0, half]))
    assert service.eval_property(group, _box([0, 0], [0, half]))
    assert service.eval_property(group, _box([0, 3], [0, 3]))

    mixed = MeetsSet(descriptor=MixedIntegerDescriptor(dimension=2, continuous=1))
    assert not service.eval_property(mixed, _box([Fraction(1, 4), 0], [Fraction(3, 4), 1]))
    assert service.eval_property(mixed, _box([Fraction(1, 4), 0], [Fraction(5, 4), 1]))


def test_module_meets_full_dimensional_bodies() -> None:
    pi = ExactNumber.label("pi")
    module = MeetsSet(descriptor=QModuleDescriptor(generators=[Point((pi, 0)), Point((0, pi))]))
    service = _build_service()
    assert service.eval_property(module, _box([0, 0], [1, 1]))
    assert not service.eval_property(module, _box([1, 1], [1, 1]))


def test_module_on_segments() -> None:
    pi = ExactNumber.label("pi")
    service = _build_service()
    grid = MeetsSet(descriptor=QModuleDescriptor(generators=[Point((pi, 0)), Point((0, pi))]))
    assert service.eval_property(grid, _box([1, 0], [2, 0]))
    assert not service.eval_property(grid, _box([0, 1], [1, 1]))
    line = MeetsSet(descriptor=QModuleDescriptor(generators=[Point((1, pi))]))
    assert service.eval_property(line, _box([-1, 0], [1, 0]))
    assert not service.eval_property(line, _box([1, 0], [2, 0]))


def test_module_on_a_planar_body_in_space() -> None:
    pi = ExactNumber.label("pi")
    service = _build_service()
    full = MeetsSet(descriptor=QModuleDescriptor(generators=[Point((pi, 0, 0)), Point((0, pi, 0))]))
    assert service.eval_property(full, _box([1, 1, 0], [2, 2, 0]))
    assert not service.eval_property(full, _box([1, 1, 1], [2, 2, 1]))
    thin = MeetsSet(descriptor=QModuleDescriptor(generators=[Point((pi, 0, 0))]))
    with pytest.raises(UndecidableError):
        service.eval_property(thin, _box([0, 0, 0], [1, 1, 0]))


def test_monotone_properties_on_nested_boxes() -> None:
    generator = random.Random(11)
    service = _build_service()
    for _ in range(30):
        lower = [Fraction(generator.randint(-6, 6), 4) for _ in range(2)]
        upper = [value + Fraction(generator.randint(0, 6), 4) for value in lower]
        grown = [value + Fraction(generator.randint(0, 4), 4) for value in upper]
        inner, outer = _box(lower, upper), _box(lower, grown)
        for prop in (Z2, LatticeCount(count=2)):
            if service.eval_property(prop, inner):
                assert service.eval_property(prop, outer)


def test_helly_condition_on_boxes_around_origin() -> None:
    generator = random.Random(3)
    family = [
        _box([-generator.randint(0, 3), -generator.randint(0, 3)], [generator.randint(0, 3), generator.randint(0, 3)])
        for _ in range(6)
    ]
    result = _build_service().check_helly_condition(Z2, family, 4)
    assert result.consistent
    assert result.witness is None


def test_helly_condition_fails_below_doignon() -> None:
    service = _build_service()
    result = service.check_helly_condition(Z2, TRIANGLES, 3)
    assert not result.consistent
    assert result.witness == [0, 1, 2, 3]
    assert service.check_helly_condition(Z2, TRIANGLES, 4).consistent
    vacuous = service.check_helly_condition(LatticeCount(count=1), TRIANGLES, 4)
    assert vacuous.consistent
    assert vacuous.witness == [0, 1, 2, 3]


def test_helly_condition_at_doignon_bound_on_random_boxes() -> None:
    generator = random.Random(5)
    service = _build_service()
    for _ in range(10):
        family = []
        for _ in range(6):
            lower = [Fraction(generator.randint(-4, 4), 2) for _ in range(2)]
            family.append(_box(lower, [value + Fraction(generator.randint(0, 4), 2) for value in lower]))
        assert service.check_helly_condition(Z2, family, 4).consistent


def test_colorable_instance_outcomes() -> None:
    service = _build_service()
    half = Fraction(1, 2)
    same = ColoredInstance(colors=[[_box([-half], [half])], [_box([-half], [half])]], property=Z1)
    outcome = service.check_colorable_instance(same)
    assert outcome.kind == "conclusion-holds"
    assert outcome.color == 1
    assert outcome.witness == Point((0,))

    missing = ColoredInstance(
        colors=[[_box([Fraction(1, 10)], [Fraction(2, 5)])], [_box([0], [1])]],
        property=Z1,
    )
    outcome = service.check_colorable_instance(missing)
    assert outcome.kind == "hypothesis-fails"
    assert outcome.rainbow == [0, 0]


def test_rainbow_cap_is_enforced() -> None:
    service = _build_service(HELLY_RAINBOW_CAP=2)
    instance = service.generate_instance(1, dimension=1, colors=2, family_size=3)
    with pytest.raises(BudgetExceededError):
        service.check_colorable_instance(instance)


def test_generated_instances_are_reproducible() -> None:
    service = _build_service()
    first = service.generate_instance(1, dimension=2, colors=4)
    second = service.generate_instance(1, dimension=2, colors=4)
    assert first.model_dump_json() == second.model_dump_json()
    assert len(first.colors) == 4
    assert ColoredInstance.model_validate_json(first.model_dump_json()) == first


def test_planted_instances_satisfy_the_hypothesis() -> None:
    service = _build_service()
    for seed in range(5):
        instance = service.generate_instance(seed, dimension=2, colors=4, planted=True)
        assert service.check_colorable_instance(instance).kind == "conclusion-holds"


def test_trials_on_the_line() -> None:
    report = _build_service().run_trials(40, seed=100, dimension=1, colors=2, workers=2)
    assert report.trials == 40
    assert len(report.records) == 40
    assert report.counterexamples == []
    assert report.conclusion_held <= report.hypothesis_held


@pytest.mark.slow
def test_colorful_doignon_in_the_plane() -> None:
    report = _build_service(HELLY_PLANTED_FRACTION=1.0).run_trials(200, dimension=2, colors=4, family_size=2)
    assert report.hypothesis_held == 200
    assert report.counterexamples == []


def test_classification_marks_volume_as_not_helly() -> None:
    table = {entry.kind: entry for entry in _build_service().classification()}
    assert not table["volume"].helly
    assert not table["volume"].evaluable
    assert table["meets_set"].orderable
