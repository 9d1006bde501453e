from __future__ import annotations

from pathlib import Path

import pytest

from app.core.config import Settings
from app.core.errors import DomainError, RamseyValueUnavailableError
from app.geometry.numbers import ExactNumber
from app.geometry.points import Point
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
    Sublattice,
    UnionDescriptor,
)
from app.models.schemas import RamseyProvenance
from app.services.bounds_service import ANCHORS, BoundsService, triangle_free_coloring


SOURCE_TEXT = Path(__file__).resolve().parents[1] / "examples" / "original_source" / "paper.md"


def _build_service(**overrides: object) -> BoundsService:
    return BoundsService(settings=Settings(**overrides))


def _diagonal(dimension: int, scale: int) -> Sublattice:
    return Sublattice(basis=[[scale * int(i == j) for j in range(dimension)] for i in range(dimension)])


def test_doignon_for_integer_space() -> None:
    report = _build_service().upper_bound(LatticeDescriptor.standard(3))
    assert report.upper == 8
    assert report.upper_rule == "doignon"
    assert "every $2^d$" in report.rule_trace[0].anchor


def test_one_sublattice_in_the_plane() -> None:
    descriptor = LatticeDifferenceDescriptor(dimension=2, removed=[_diagonal(2, 2)])
    report = _build_service().report(descriptor)
    assert report.upper == 6
    assert report.upper_rule == "one_sublattice"
    assert {rule.rule: rule.value for rule in report.rule_trace}["sublattices"] == 8
    assert report.lower == 6


def test_two_sublattices_in_space_use_r2() -> None:
    descriptor = LatticeDifferenceDescriptor(dimension=3, removed=[_diagonal(3, 2), _diagonal(3, 3)])
    report = _build_service().upper_bound(descriptor)
    assert report.upper == 40
    assert report.rule_trace[-1].note == "R_2=6 (verified-exhaustively)"


def test_many_sublattices_without_override_have_no_bound() -> None:
    removed = [_diagonal(2, scale) for scale in (2, 3, 5, 7)]
    report = _build_service().upper_bound(LatticeDifferenceDescriptor(dimension=2, removed=removed))
    assert report.upper is None
    assert report.rule_trace[0].applies is False


def test_q_module_in_four_dimensions() -> None:
    pi = ExactNumber.label("pi")
    generators = [Point([pi if i == j else 0 for j in range(4)]) for i in range(4)]
    assert _build_service().upper_bound(QModuleDescriptor(generators=generators)).upper == 8


def test_rational_q_module_is_rational_space() -> None:
    descriptor = QModuleDescriptor(generators=[Point((1, 0)), Point((0, 1))])
    report = _build_service().report(descriptor)
    assert report.upper == report.lower == 3


def test_q_module_sharpness_shape_gives_lower_bound() -> None:
    ln = [ExactNumber.label(f"ln{prime}") for prime in (2, 3, 5, 7, 11, 13)]
    centre = [ln[1], ln[4]]
    generators = []
    for axis, (low, high) in enumerate(((ln[0], ln[2]), (ln[3], ln[5]))):
        for value in (low, high):
            coordinates = list(centre)
            coordinates[axis] = value
            generators.append(Point(coordinates))
    report = _build_service().report(QModuleDescriptor(generators=generators))
    assert report.lower == 4
    assert report.lower_source == "module_sharp"
    assert report.upper == 4


def test_line_descriptors_have_two() -> None:
    service = _build_service()
    for descriptor in (PrimeGridDescriptor(dimension=1), PuncturedSpaceDescriptor(dimension=1, excluded=[["0"]])):
        report = service.report(descriptor)
        assert report.upper == report.lower == 2


def test_prime_grid_lower_bound_without_upper() -> None:
    report = _build_service().report(PrimeGridDescriptor(dimension=2))
    assert report.lower == 14
    assert report.upper is None
    assert not report.upper_finite_unknown


def test_composite_grid_is_finite_but_unknown() -> None:
    report = _build_service().upper_bound(ComplementOfPrimesDescriptor(dimension=2))
    assert report.upper is None
    assert report.upper_finite_unknown


def test_lattice_lower_bound_is_doignon() -> None:
    assert _build_service().known_lower_bound(LatticeDescriptor.standard(2)).lower == 4


def test_mixed_and_rational_spaces() -> None:
    service = _build_service()
    assert service.report(MixedIntegerDescriptor(dimension=3, continuous=1)).upper == 8
    assert service.report(RationalSpaceDescriptor(dimension=3)).lower == 4


def test_punctured_plane_is_four() -> None:
    report = _build_service().report(PuncturedSpaceDescriptor(dimension=2, excluded=[["0", "0"]]))
    assert report.upper == report.lower == 4


def test_finite_and_union_rules() -> None:
    service = _build_service()
    first = ExplicitFiniteDescriptor(points=[["0", "0"], ["1", "0"], ["0", "1"]])
    assert service.upper_bound(first).upper == 3
    union = UnionDescriptor(parts=[first, LatticeDescriptor.standard(2)])
    assert service.upper_bound(union).upper == 7


def test_discrete_dense_product_bounds() -> None:
    service = _build_service()
    line = DiscreteDenseProductDescriptor(integer_dimension=1, dense_generators=["1", {"pi": "1"}])
    report = service.report(line)
    assert report.upper == 8
    assert report.lower == 4
    space = DiscreteDenseProductDescriptor(integer_dimension=2, dense_generators=["1", {"pi": "1"}, {"e": "1"}])
    report = service.report(space)
    assert report.lower == 8
    assert report.lower_source == "lattice_pairs"
    assert report.upper == 32
    nine = next(rule for rule in report.rule_trace if rule.rule == "nine_points")
    assert nine.applies is False
    assert nine.value is None


def test_product_rules() -> None:
    service = _build_service()
    cylinder = ProductDescriptor(left=PuncturedSpaceDescriptor(dimension=1), right=LatticeDescriptor.standard(2))
    report = service.report(cylinder)
    assert report.upper == report.lower == 8
    grid = ProductDescriptor(left=LatticeDescriptor.standard(1), right=LatticeDescriptor.standard(1))
    assert service.report(grid).lower == 4
    primes = ProductDescriptor(left=PrimeGridDescriptor(dimension=2), right=LatticeDescriptor.standard(1))
    assert service.known_lower_bound(primes).lower == 28


def test_face_bound_applies_to_closed_sets_only() -> None:
    service = _build_service()
    report = service.upper_bound(PrimeGridDescriptor(dimension=2), face_bound=5)
    assert report.upper == 15
    assert report.upper_rule == "face"
    dense = DiscreteDenseProductDescriptor(integer_dimension=1, dense_generators=["1", {"pi": "1"}])
    assert service.upper_bound(dense, face_bound=1).upper_rule == "finitely_generated"


def test_certified_lower_bound_is_merged() -> None:
    service = _build_service()
    report = service.report(LatticeDescriptor.standard(2), certified_lower=3)
    assert report.lower == 4
    assert report.lower_source == "doignon"
    report = service.report(ComplementOfPrimesDescriptor(dimension=2), certified_lower=5)
    assert report.lower == 5
    assert report.lower_source == "certificate"
    with pytest.raises(DomainError):
        service.report(LatticeDescriptor.standard(2), certified_lower=5)


def test_small_ramsey_numbers_are_verified() -> None:
    service = _build_service()
    first, second = service.ramsey(1), service.ramsey(2)
    assert (first.value, second.value) == (3, 6)
    assert first.provenance is second.provenance is RamseyProvenance.VERIFIED
    assert triangle_free_coloring(6, 2) is None
    assert triangle_free_coloring(5, 2) is not None


def test_literature_and_override_ramsey_numbers() -> None:
    service = _build_service(HELLY_RAMSEY_OVERRIDES={4: 51})
    assert service.ramsey(3).provenance is RamseyProvenance.LITERATURE
    assert service.ramsey(3).value == 17
    assert service.ramsey(4).value == 51
    with pytest.raises(RamseyValueUnavailableError):
        service.ramsey(5)
    with pytest.raises(RamseyValueUnavailableError):
        _build_service(HELLY_RAMSEY_OVERRIDES={4: 10}).ramsey(4)


def test_lower_never_exceeds_upper() -> None:
    service = _build_service()
    descriptors = [
        LatticeDescriptor.standard(1),
        LatticeDescriptor.standard(4),
        LatticeDifferenceDescriptor(dimension=2, removed=[_diagonal(2, 2)]),
        PuncturedSpaceDescriptor(dimension=3),
        PuncturedSpaceDescriptor(dimension=2, excluded=[["0", "0"], ["1", "1"]]),
        MixedIntegerDescriptor(dimension=4, continuous=2),
        RationalSpaceDescriptor(dimension=2),
    ]
    for descriptor in descriptors:
        report = service.report(descriptor)
        assert report.lower is not None and report.upper is not None
        assert report.lower <= report.upper


def test_anchors_are_quoted_from_the_source_text() -> None:
    if not SOURCE_TEXT.exists():
        pytest.skip("source text is not available")
    text = SOURCE_TEXT.read_text(encoding="utf-8")
    assert [anchor for anchor in ANCHORS if anchor not in text] == []


def test_every_traced_anchor_is_a_known_quote() -> None:
    service = _build_service()
    descriptors = [
        LatticeDescriptor.standard(3),
        LatticeDifferenceDescriptor(dimension=2, removed=[_diagonal(2, 2)]),
        PuncturedSpaceDescriptor(dimension=2),
        RationalSpaceDescriptor(dimension=2),
        MixedIntegerDescriptor(dimension=3, continuous=1),
        ExplicitFiniteDescriptor(points=[["0", "0"], ["1", "0"]]),
        DiscreteDenseProductDescriptor(integer_dimension=2, dense_generators=["1", {"pi": "1"}, {"e": "1"}]),
        ProductDescriptor(left=PuncturedSpaceDescriptor(dimension=1), right=LatticeDescriptor.standard(2)),
    ]
    anchors = {rule.anchor for descriptor in descriptors for rule in service.report(descriptor).rule_trace}
    assert anchors
    assert anchors <= set(ANCHORS)
