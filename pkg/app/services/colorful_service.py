"""Property evaluation on rational polytopes and randomized colorful Helly trials."""

from __future__ import annotations

import functools
import itertools
import logging
import math
import random
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

from app.core.config import Settings, get_settings
from app.core.errors import BudgetExceededError, DimensionMismatchError, UndecidableError, UnsupportedCoordinateError
from app.geometry import linalg
from app.geometry.lp import LinearProgram, LPStatus, bounding_box
from app.geometry.numbers import ExactNumber
from app.geometry.points import HalfSpace, Point
from app.geometry.scalars import RATIONAL
from app.models.descriptors import (
    DiscreteDenseProductDescriptor,
    LatticeDescriptor,
    MixedIntegerDescriptor,
    PuncturedSpaceDescriptor,
    QModuleDescriptor,
    RationalSpaceDescriptor,
    SetDescriptor,
    UnionDescriptor,
    Window,
    descriptor_dimension,
)
from app.models.schemas import (
    ColoredInstance,
    ColorfulOutcome,
    DimensionAtLeast,
    HellyConditionResult,
    LatticeCount,
    LatticeDifferenceCount,
    MeetsSet,
    Polytope,
    PropertyClassification,
    PropertySpec,
    TrialRecord,
    TrialReport,
)
from app.services import pointsets_service as pointsets

logger = logging.getLogger(__name__)

CLASSIFICATION = [
    PropertyClassification(
        kind="meets_set",
        helly=True,
        monotone=True,
        orderable=True,
        evaluable=True,
        note="Helly number h(S); orderable for discrete S with h(S) finite",
    ),
    PropertyClassification(
        kind="lattice_count",
        helly=True,
        monotone=True,
        orderable=True,
        evaluable=True,
        note="quantitative Doignon theorem",
    ),
    PropertyClassification(
        kind="lattice_difference_count",
        helly=True,
        monotone=True,
        orderable=True,
        evaluable=True,
        note="quantitative theorem for differences of lattices",
    ),
    PropertyClassification(
        kind="dimension",
        helly=True,
        monotone=True,
        orderable=None,
        evaluable=True,
        note="Helly number known for every k; orderability not claimed",
    ),
    PropertyClassification(
        kind="volume",
        helly=False,
        monotone=True,
        orderable=False,
        evaluable=False,
        note="volume at least 1 has infinite Helly number",
    ),
]


class _Body:
    """A bounded rational polytope with its exact bounding box."""

    def __init__(self, polytope: Polytope) -> None:
        if any(isinstance(halfspace.offset, ExactNumber) for halfspace in polytope.halfspaces):
            raise UnsupportedCoordinateError("Polytope offsets must be rational")
        self.halfspaces = polytope.halfspaces
        self.dimension = polytope.dimension
        self.box = bounding_box(self.halfspaces)

    @property
    def is_empty(self) -> bool:
        return self.box is None

    def program(self, head: Sequence[int] = ()) -> LinearProgram:
        """LP over the body with the leading coordinates fixed to head."""

        equalities = [
            ([int(axis == position) for axis in range(self.dimension)], value) for position, value in enumerate(head)
        ]
        return LinearProgram(
            RATIONAL,
            self.dimension,
            equalities=equalities,
            inequalities=[(halfspace.normal, halfspace.offset) for halfspace in self.halfspaces],
            free=range(self.dimension),
        )

    def window(self, axes: int | None = None) -> Window:
        """Integer window around the box, optionally restricted to the leading axes."""

        lower, upper = self.box
        axes = self.dimension if axes is None else axes
        return Window(
            lower=[math.floor(value) for value in lower[:axes]],
            upper=[math.ceil(value) for value in upper[:axes]],
        )

    def contains(self, point: Point) -> bool:
        return all(halfspace.contains(point) for halfspace in self.halfspaces)

    def lattice_points(self) -> list[Point]:
        if self.is_empty:
            return []
        return [point for point in map(Point, self.window().integer_points()) if self.contains(point)]

    def vertex(self) -> Point:
        return Point(self.program().optimize().x)

    def _implicit_equalities(self) -> list[list[Fraction]]:
        program = self.program()
        return [
            list(halfspace.normal)
            for halfspace in self.halfspaces
            if program.optimize(halfspace.normal, maximize=False).value == halfspace.offset
        ]

    def affine_dimension(self) -> int:
        """d minus the rank of the implicit equalities; -1 when empty."""

        if self.is_empty:
            return -1
        return self.dimension - linalg.rank(RATIONAL, self._implicit_equalities())

    def affine_hull(self) -> tuple[Point, list[Point]]:
        """A vertex and a direction basis of the affine hull of a nonempty body."""

        directions = linalg.nullspace(RATIONAL, self._implicit_equalities(), width=self.dimension)
        return self.vertex(), [Point(direction) for direction in directions]

    def extreme_points(self) -> list[Point]:
        """Distinct minimizers and maximizers of each coordinate."""

        program = self.program()
        found: list[Point] = []
        for axis in range(self.dimension):
            direction = [int(position == axis) for position in range(self.dimension)]
            for maximize in (False, True):
                point = Point(program.optimize(direction, maximize=maximize).x)
                if point not in found:
                    found.append(point)
        return found


def _intersection(polytopes: Sequence[Polytope]) -> Polytope:
    return functools.reduce(Polytope.intersect, polytopes)


class ColorfulService:
    """Property-Helly checks and colorful Helly experiments over bounded rational polytopes."""

    def __init__(self, *, settings: Settings | None = None) -> None:
        self.settings = settings or get_settings()

    def classification(self) -> list[PropertyClassification]:
        return list(CLASSIFICATION)

    def eval_property(self, prop: PropertySpec, polytope: Polytope) -> bool:
        holds, _, _ = self._evaluate(prop, polytope)
        return holds

    def _evaluate(self, prop: PropertySpec, polytope: Polytope) -> tuple[bool, Point | None, int | None]:
        """Truth value, a witness point of S when one is found, and the point count for counting properties."""

        body = _Body(polytope)
        if isinstance(prop, MeetsSet):
            if descriptor_dimension(prop.descriptor) != body.dimension:
                raise DimensionMismatchError("Property set and polytope dimensions differ")
            if body.is_empty:
                return False, None, None
            meets, witness = _meet(prop.descriptor, body)
            return meets, witness, None
        if isinstance(prop, LatticeCount):
            count = len(body.lattice_points())
            return count >= prop.count, None, count
        if isinstance(prop, LatticeDifferenceCount):
            points = [] if body.is_empty else pointsets.enumerate_window(prop.descriptor, body.window())
            count = sum(1 for point in points if body.contains(point))
            return count >= prop.count, None, count
        if isinstance(prop, DimensionAtLeast):
            return body.affine_dimension() >= prop.minimum, None, None
        raise UndecidableError(f"No evaluation rule for {prop.kind}")

    def check_helly_condition(self, prop: PropertySpec, family: Sequence[Polytope], h: int) -> HellyConditionResult:
        """If P holds on every h-wise intersection it must hold on the whole family.

        A failing h-wise intersection is returned as the witness of a vacuous pass.
        """

        size = min(h, len(family))
        for subset in itertools.combinations(range(len(family)), size):
            if not self.eval_property(prop, _intersection([family[index] for index in subset])):
                return HellyConditionResult(consistent=True, witness=list(subset))
        if self.eval_property(prop, _intersection(family)):
            return HellyConditionResult(consistent=True)
        logger.warning("Helly condition fails for %s with h=%d on %d sets", prop.kind, h, len(family))
        return HellyConditionResult(consistent=False, witness=list(range(len(family))))

    def check_colorable_instance(self, instance: ColoredInstance) -> ColorfulOutcome:
        """Hypothesis on every rainbow subfamily, then the conclusion on some color class.

        Rainbow entries index into each color's family; colors are reported from 1.
        """

        rainbows = math.prod(len(family) for family in instance.colors)
        if rainbows > self.settings.rainbow_cap:
            raise BudgetExceededError(f"{rainbows} rainbow subfamilies exceed the cap of {self.settings.rainbow_cap}")
        for choice in itertools.product(*(range(len(family)) for family in instance.colors)):
            members = [family[index] for family, index in zip(instance.colors, choice)]
            if not self.eval_property(instance.property, _intersection(members)):
                return ColorfulOutcome(kind="hypothesis-fails", rainbow=list(choice))
        for color, family in enumerate(instance.colors, start=1):
            holds, witness, count = self._evaluate(instance.property, _intersection(family))
            if holds:
                return ColorfulOutcome(kind="conclusion-holds", color=color, witness=witness, count=count)
        logger.error("colorful counterexample found for seed %s", instance.seed)
        return ColorfulOutcome(kind="counterexample")

    def generate_instance(
        self,
        seed: int,
        *,
        dimension: int = 2,
        colors: int | None = None,
        family_size: int = 3,
        coordinate_range: int = 3,
        planted: bool | None = None,
        prop: PropertySpec | None = None,
    ) -> ColoredInstance:
        """Random axis-parallel boxes with half-integer corners.

        Planted instances share one integer point across every box, so every rainbow intersection meets Z^d.
        """

        generator = random.Random(seed)
        colors = colors if colors is not None else 2**dimension
        if planted is None:
            planted = generator.random() < self.settings.planted_fraction
        anchor = [generator.randint(-coordinate_range, coordinate_range) for _ in range(dimension)]
        families = []
        for _ in range(colors):
            family = []
            for _ in range(family_size):
                if planted:
                    lower = [value - Fraction(generator.randint(0, 2 * coordinate_range), 2) for value in anchor]
                    upper = [value + Fraction(generator.randint(0, 2 * coordinate_range), 2) for value in anchor]
                else:
                    lower = [
                        Fraction(generator.randint(-2 * coordinate_range, 2 * coordinate_range), 2)
                        for _ in range(dimension)
                    ]
                    upper = [value + Fraction(generator.randint(0, 2 * coordinate_range), 2) for value in lower]
                family.append(_box(lower, upper))
            families.append(family)
        return ColoredInstance(
            colors=families,
            property=prop or MeetsSet(descriptor=LatticeDescriptor.standard(dimension)),
            seed=seed,
            planted=planted,
        )

    def run_trials(
        self,
        trials: int,
        *,
        seed: int = 0,
        dimension: int = 2,
        colors: int | None = None,
        family_size: int = 3,
        coordinate_range: int = 3,
        workers: int | None = None,
        prop: PropertySpec | None = None,
    ) -> TrialReport:
        def trial(offset: int) -> tuple[ColoredInstance, TrialRecord]:
            instance = self.generate_instance(
                seed + offset,
                dimension=dimension,
                colors=colors,
                family_size=family_size,
                coordinate_range=coordinate_range,
                prop=prop,
            )
            outcome = self.check_colorable_instance(instance)
            return instance, TrialRecord(seed=seed + offset, planted=instance.planted, outcome=outcome)

        with ThreadPoolExecutor(max_workers=workers or self.settings.workers) as executor:
            results = list(executor.map(trial, range(trials)))
        records = [record for _, record in results]
        report = TrialReport(
            trials=trials,
            hypothesis_held=sum(record.outcome.kind != "hypothesis-fails" for record in records),
            conclusion_held=sum(record.outcome.kind == "conclusion-holds" for record in records),
            counterexamples=[instance for instance, record in results if record.outcome.kind == "counterexample"],
            records=records,
        )
        logger.info(
            "%d trials: hypothesis held in %d, conclusion in %d, %d counterexamples",
            report.trials,
            report.hypothesis_held,
            report.conclusion_held,
            len(report.counterexamples),
        )
        return report


def _box(lower: Sequence[Fraction], upper: Sequence[Fraction]) -> Polytope:
    dimension = len(lower)
    halfspaces = []
    for axis in range(dimension):
        unit = [int(position == axis) for position in range(dimension)]
        halfspaces.append(HalfSpace(unit, upper[axis]))
        halfspaces.append(HalfSpace([-value for value in unit], -lower[axis]))
    return Polytope(halfspaces=halfspaces)


def _meet(descriptor: SetDescriptor, body: _Body) -> tuple[bool, Point | None]:
    """Whether the nonempty body meets S, with a point of S in it when one is cheap to name."""

    if isinstance(descriptor, UnionDescriptor):
        for part in descriptor.parts:
            meets, witness = _meet(part, body)
            if meets:
                return True, witness
        return False, None
    if pointsets.is_discrete(descriptor):
        points = pointsets.enumerate_window(descriptor, body.window())
        witness = next((point for point in points if body.contains(point)), None)
        return witness is not None, witness
    if isinstance(descriptor, RationalSpaceDescriptor):
        return True, body.vertex()
    if isinstance(descriptor, PuncturedSpaceDescriptor):
        return _punctured_meet(descriptor, body)
    if isinstance(descriptor, MixedIntegerDescriptor):
        return _mixed_meet(descriptor, body)
    if isinstance(descriptor, DiscreteDenseProductDescriptor):
        return _fiber_meet(descriptor, body)
    if isinstance(descriptor, QModuleDescriptor):
        return _q_module_meet(descriptor, body)
    raise UndecidableError(f"Cannot decide whether the polytope meets {descriptor.kind}")


def _punctured_meet(descriptor: PuncturedSpaceDescriptor, body: _Body) -> tuple[bool, Point | None]:
    extremes = body.extreme_points()
    if len(extremes) == 1:
        return extremes[0] not in descriptor.excluded, extremes[0]
    # The segment between two extreme points has more points than there are exclusions.
    start, end = extremes[0], extremes[1]
    for step in range(1, len(descriptor.excluded) + 2):
        point = start + (end - start).scale(Fraction(1, step + 1))
        if point not in descriptor.excluded:
            return True, point
    raise UndecidableError("No point of the segment avoids the excluded points")


def _mixed_meet(descriptor: MixedIntegerDescriptor, body: _Body) -> tuple[bool, Point | None]:
    split = descriptor.dimension - descriptor.continuous
    if split == 0:
        return True, body.vertex()
    for head in body.window(split).integer_points():
        solution = body.program(head).optimize()
        if solution.status is LPStatus.OPTIMAL:
            return True, Point(solution.x)
    return False, None


def _fiber_meet(descriptor: DiscreteDenseProductDescriptor, body: _Body) -> tuple[bool, Point | None]:
    """Scan the integer fibers; an open fiber meets the dense group, a single value is tested exactly."""

    direction = [0] * body.dimension
    direction[-1] = 1
    for head in body.window(descriptor.integer_dimension).integer_points():
        program = body.program(head)
        if not program.feasible:
            continue
        low = program.optimize(direction, maximize=False).value
        high = program.optimize(direction, maximize=True).value
        if low < high:
            return True, None
        if pointsets.dense_group_contains(descriptor.dense_generators, low):
            return True, Point((*head, low))
    return False, None


def _q_module_meet(descriptor: QModuleDescriptor, body: _Body) -> tuple[bool, Point | None]:
    dimension = body.affine_dimension()
    if dimension == 0:
        vertex = body.vertex()
        meets = pointsets.contains(descriptor, vertex)
        return meets, vertex if meets else None
    anchor, directions = body.affine_hull()
    point, rank = pointsets.module_slice(descriptor, anchor, directions)
    if point is None:
        return False, None
    if rank == dimension:
        return True, None
    if rank == 0:
        meets = body.contains(point)
        return meets, point if meets else None
    raise UndecidableError(f"The module is dense only along a {rank}-flat of a {dimension}-dimensional polytope")
