"""Lower-bound certificate checks and the Ramsey midpoint diagnostic."""

from __future__ import annotations

import itertools
import logging
import math
from collections.abc import Sequence
from fractions import Fraction
from typing import Any

from app.core.errors import (
    DimensionMismatchError,
    InvalidDescriptorError,
    NotEnumerableError,
    UnsupportedCoordinateError,
    UnsupportedDimensionError,
)
from app.geometry.core import CorePolytope
from app.geometry.lp import LPStatus, bounding_box, lp_optimize, solve_general
from app.geometry.numbers import ExactNumber, Scalar, normalize, sign
from app.geometry.points import HalfSpace, Point, check_same_dimension
from app.geometry.predicates import RationalHull, convex_hull_2d, strict_convex_position
from app.geometry.scalars import context_for
from app.models.descriptors import (
    DiscreteDenseProductDescriptor,
    LatticeDifferenceDescriptor,
    PuncturedSpaceDescriptor,
    QModuleDescriptor,
    SetDescriptor,
    Sublattice,
    Window,
    descriptor_dimension,
)
from app.models.schemas import (
    CertificateKind,
    Configuration,
    EdgeColor,
    LowerBoundCertificate,
    ParityClass,
    RamseyDiagnostic,
    RamseyFinding,
    Verdict,
)
from app.services import pointsets_service as pointsets

logger = logging.getLogger(__name__)


class CertifyService:
    """Validates vertex-polytope, face-polytope and Hoffman certificates."""

    def check(self, configuration: Configuration, claimed_bound: int | None = None) -> LowerBoundCertificate:
        """Run the check matching the configuration kind and compare against the claimed bound."""

        if configuration.kind is CertificateKind.FACE_POLYTOPE:
            certificate = self.check_face_polytope(configuration.descriptor, configuration.halfspaces)
        elif configuration.kind is CertificateKind.HOFFMAN:
            certificate = self.check_hoffman(configuration.descriptor, configuration.points)
        else:
            certificate = self.check_vertex_polytope(configuration.descriptor, configuration.points)
        if claimed_bound is None or claimed_bound == certificate.claimed_bound:
            return certificate
        if certificate.verdict.is_valid:
            verdict = Verdict.invalid(
                "CLAIMED_BOUND_MISMATCH",
                f"Configuration certifies {certificate.claimed_bound}, file claims {claimed_bound}",
            )
        else:
            verdict = certificate.verdict
        return LowerBoundCertificate(configuration=configuration, claimed_bound=claimed_bound, verdict=verdict)

    def check_vertex_polytope(self, descriptor: SetDescriptor, points: Sequence[Point]) -> LowerBoundCertificate:
        points = list(points)
        configuration = Configuration(descriptor=descriptor, kind=CertificateKind.VERTEX_POLYTOPE, points=points)
        _require_discrete(descriptor)
        verdict = _membership_verdict(descriptor, points)
        if verdict is None and not strict_convex_position(points):
            verdict = Verdict.invalid("NOT_CONVEX_POSITION", "Points are not in strict convex position")
        if verdict is None:
            hull = RationalHull(points)
            members = set(points)
            for candidate in pointsets.enumerate_window(descriptor, Window.bounding(points)):
                if candidate not in members and hull.contains(candidate):
                    verdict = Verdict.invalid(
                        "CAPTURED_POINT",
                        "A point of S other than the vertices lies in the hull",
                        offending_point=candidate,
                    )
                    break
        return _certificate(configuration, len(points), verdict)

    def check_face_polytope(
        self, descriptor: SetDescriptor, halfspaces: Sequence[HalfSpace]
    ) -> LowerBoundCertificate:
        halfspaces = list(halfspaces)
        configuration = Configuration(
            descriptor=descriptor, kind=CertificateKind.FACE_POLYTOPE, halfspaces=halfspaces
        )
        _require_discrete(descriptor)
        if not halfspaces:
            raise DimensionMismatchError("A face polytope needs at least one half-space")
        dimension = descriptor_dimension(descriptor)
        if any(halfspace.dimension != dimension for halfspace in halfspaces):
            raise DimensionMismatchError("Half-space and set dimensions differ")
        if any(isinstance(halfspace.offset, ExactNumber) for halfspace in halfspaces):
            raise UnsupportedCoordinateError("Face-polytope offsets must be rational")

        box = bounding_box(halfspaces)
        if box is None:
            verdict = Verdict.invalid("EMPTY_POLYTOPE", "The half-spaces have empty intersection")
            return _certificate(configuration, len(halfspaces), verdict)
        lower, upper = box
        for index, halfspace in enumerate(halfspaces):
            others = halfspaces[:index] + halfspaces[index + 1 :]
            if not others:
                continue
            result = lp_optimize(others, halfspace.normal, "max")
            if result.status is LPStatus.OPTIMAL and result.value <= halfspace.offset:
                verdict = Verdict.invalid(
                    "REDUNDANT_HALFSPACE", f"Half-space {index} does not cut the polytope", offending_index=index
                )
                return _certificate(configuration, len(halfspaces), verdict)

        window = Window(lower=[math.floor(value) for value in lower], upper=[math.ceil(value) for value in upper])
        hits = [0] * len(halfspaces)
        verdict = None
        for candidate in pointsets.enumerate_window(descriptor, window):
            sides = [halfspace.side(candidate) for halfspace in halfspaces]
            if any(value < 0 for value in sides):
                continue
            tight = [index for index, value in enumerate(sides) if value == 0]
            if len(tight) != 1:
                code = "INTERIOR_POINT" if not tight else "POINT_ON_SEVERAL_FACETS"
                verdict = Verdict.invalid(
                    code, "A point of S in P is not in the relative interior of a facet", offending_point=candidate
                )
                break
            hits[tight[0]] += 1
        if verdict is None:
            for index, count in enumerate(hits):
                if count != 1:
                    verdict = Verdict.invalid(
                        "FACET_POINT_COUNT",
                        f"Facet {index} carries {count} points of S instead of one",
                        offending_index=index,
                    )
                    break
        return _certificate(configuration, len(halfspaces), verdict)

    def check_hoffman(self, descriptor: SetDescriptor, points: Sequence[Point]) -> LowerBoundCertificate:
        """Valid iff R lies in S in strict convex position and its core misses S."""

        points = list(points)
        configuration = Configuration(descriptor=descriptor, kind=CertificateKind.HOFFMAN, points=points)
        verdict = _membership_verdict(descriptor, points)
        if verdict is None and not strict_convex_position(points):
            verdict = Verdict.invalid("NOT_CONVEX_POSITION", "Points are not in strict convex position")
        if verdict is None and len(points) > 1:
            verdict = self._core_verdict(descriptor, points)
        return _certificate(configuration, len(points), verdict)

    def _core_verdict(self, descriptor: SetDescriptor, points: list[Point]) -> Verdict | None:
        if pointsets.is_discrete(descriptor):
            return _discrete_core(descriptor, CorePolytope(points))
        if isinstance(descriptor, DiscreteDenseProductDescriptor):
            return _fiber_core(descriptor, points)
        core = CorePolytope(points)
        try:
            if isinstance(descriptor, PuncturedSpaceDescriptor):
                return _punctured_core(descriptor, core)
            if isinstance(descriptor, QModuleDescriptor):
                return _q_module_core(descriptor, core)
        except UnsupportedCoordinateError as error:
            return Verdict.undecided("NONLINEAR_CORE", str(error))
        return Verdict.undecided("UNSUPPORTED_SET", f"No core decision procedure for {descriptor.kind}")

    def face_polytope_from_vertices(self, points: Sequence[Point]) -> list[HalfSpace]:
        """Supporting half-planes through each vertex, parallel to the chord joining its neighbours."""

        if not points or check_same_dimension(points) != 2 or not all(point.is_rational for point in points):
            raise UnsupportedDimensionError("Face polytopes are derived from rational planar vertices only")
        polygon = convex_hull_2d(points)
        if len(points) < 3 or len(polygon) != len(points):
            raise InvalidDescriptorError("Vertices must be at least three points in strict convex position")
        halfspaces = []
        count = len(polygon)
        for index, vertex in enumerate(polygon):
            previous, following = polygon[index - 1], polygon[(index + 1) % count]
            chord = following - previous
            normal = (chord[1], -chord[0])
            halfspaces.append(HalfSpace(normal, normal[0] * vertex[0] + normal[1] * vertex[1]))
        return halfspaces

    def face_certificate_from_vertices(
        self, descriptor: SetDescriptor, points: Sequence[Point]
    ) -> LowerBoundCertificate:
        return self.check_face_polytope(descriptor, self.face_polytope_from_vertices(points))

    def ramsey_midpoint_diagnostic(
        self, points: Sequence[Point], removed: Sequence[Sublattice]
    ) -> RamseyDiagnostic:
        """Colour same-parity pairs by the removed sublattice holding their midpoint."""

        if not points:
            return RamseyDiagnostic(parity_classes=[], edge_colors=[], finding=RamseyFinding(kind="clean"))
        dimension = check_same_dimension(points)
        if not all(point.is_integer for point in points):
            raise InvalidDescriptorError("The midpoint diagnostic takes integer points")
        descriptor = LatticeDifferenceDescriptor(dimension=dimension, removed=list(removed))
        for point in points:
            if pointsets.removed_index(descriptor, point.integer_coordinates()) is not None:
                raise InvalidDescriptorError(f"{point!r} lies in a removed sublattice")

        classes: dict[tuple[int, ...], list[int]] = {}
        for index, point in enumerate(points):
            classes.setdefault(pointsets.parity_class(point), []).append(index)
        colors: dict[tuple[int, int], int | None] = {}
        edges: list[EdgeColor] = []
        finding: RamseyFinding | None = None
        for members in classes.values():
            for first, second in itertools.combinations(members, 2):
                midpoint = (points[first] + points[second]).scale(Fraction(1, 2))
                color = pointsets.removed_index(descriptor, midpoint.integer_coordinates())
                colors[(first, second)] = color
                edges.append(
                    EdgeColor(
                        first=first,
                        second=second,
                        midpoint=midpoint,
                        color="midpoint-in-S" if color is None else color,
                    )
                )
                if color is None and finding is None:
                    finding = RamseyFinding(kind="midpoint-in-S", pair=[first, second])
        if finding is None:
            finding = _monochromatic_triangle(points, classes.values(), colors, descriptor)
        return RamseyDiagnostic(
            parity_classes=[ParityClass(parity=list(key), members=value) for key, value in classes.items()],
            edge_colors=edges,
            finding=finding,
        )


def _require_discrete(descriptor: SetDescriptor) -> None:
    if not pointsets.is_discrete(descriptor):
        raise NotEnumerableError(f"{descriptor.kind} is not discrete; use a Hoffman certificate instead")


def _membership_verdict(descriptor: SetDescriptor, points: list[Point]) -> Verdict | None:
    if not points:
        raise DimensionMismatchError("A configuration needs at least one point")
    if check_same_dimension(points) != descriptor_dimension(descriptor):
        raise DimensionMismatchError("Configuration and set dimensions differ")
    seen: set[Point] = set()
    for point in points:
        if point in seen:
            return Verdict.invalid("DUPLICATE_POINT", "Points must be pairwise distinct", offending_point=point)
        seen.add(point)
        if not pointsets.contains(descriptor, point):
            return Verdict.invalid("NOT_IN_SET", "Point is not a member of S", offending_point=point)
    return None


def _certificate(configuration: Configuration, bound: int, verdict: Verdict | None) -> LowerBoundCertificate:
    verdict = verdict or Verdict.valid()
    logger.info("%s certificate of size %d: %s", configuration.kind.value, bound, verdict.status.value)
    return LowerBoundCertificate(configuration=configuration, claimed_bound=bound, verdict=verdict)


def _discrete_core(descriptor: SetDescriptor, core: CorePolytope) -> Verdict | None:
    box = core.bbox()
    if box is None:
        return None
    low, high = box
    window = Window(
        lower=[math.floor(value) for value in low.coordinates],
        upper=[math.ceil(value) for value in high.coordinates],
    )
    for candidate in pointsets.enumerate_window(descriptor, window):
        if core.contains_fast(candidate):
            return Verdict.invalid("CORE_MEETS_SET", "The core contains a point of S", offending_point=candidate)
    return None


def _punctured_core(descriptor: PuncturedSpaceDescriptor, core: CorePolytope) -> Verdict | None:
    dimension = core.dim()
    if dimension < 0:
        return None
    if dimension == 0:
        point = core.point()
        if point in descriptor.excluded:
            return None
        return Verdict.invalid("CORE_MEETS_SET", "The core point is not excluded", offending_point=point)
    return Verdict.invalid("NONDEGENERATE_CORE", f"A {dimension}-dimensional core meets the punctured space")


def _q_module_core(descriptor: QModuleDescriptor, core: CorePolytope) -> Verdict | None:
    dimension = core.dim()
    if dimension < 0:
        return None
    if dimension == 0:
        point = core.point()
        if pointsets.contains(descriptor, point):
            return Verdict.invalid("CORE_MEETS_SET", "The core point lies in the module", offending_point=point)
        return None
    witnesses = core.witnesses()
    for witness in witnesses:
        if pointsets.contains(descriptor, witness):
            return Verdict.invalid("CORE_MEETS_SET", "A core vertex lies in the module", offending_point=witness)
    directions = [witness - witnesses[0] for witness in witnesses[1:]]
    point, rank = pointsets.module_slice(descriptor, witnesses[0], directions)
    if point is None:
        return None
    if rank == dimension:
        return Verdict.invalid("DENSE_CORE", f"The module is dense in a {dimension}-dimensional core")
    if rank == 0:
        if core.contains(point):
            return Verdict.invalid("CORE_MEETS_SET", "The module meets the core in one point", offending_point=point)
        return None
    return Verdict.undecided(
        "DENSITY_UNDECIDED", f"The module is dense only along a {rank}-flat of a {dimension}-dimensional core"
    )


def _fiber_core(descriptor: DiscreteDenseProductDescriptor, points: list[Point]) -> Verdict | None:
    """Scan the integer fibers of Z^m x D over the projected core; each fiber is a segment in the last axis."""

    split = descriptor.integer_dimension
    heads = [Point(point.coordinates[:split]) for point in points]
    tails = [point[split] for point in points]
    count = len(points)
    others = [[position for position in range(count) if position != index] for index in range(count)]
    hulls = [RationalHull([heads[position] for position in group]) for group in others]
    for coordinates in Window.bounding(heads).integer_points():
        base = Point(coordinates)
        if not all(hull.contains(base) for hull in hulls):
            continue
        lows, highs = [], []
        for group in others:
            low = _fiber_extreme(heads, tails, group, coordinates, maximize=False)
            high = _fiber_extreme(heads, tails, group, coordinates, maximize=True)
            if low is None or high is None:
                break
            lows.append(low)
            highs.append(high)
        else:
            low, high = _extreme(lows, larger=True), _extreme(highs, larger=False)
            gap = sign(normalize(high - low))
            if gap < 0:
                continue
            if gap > 0:
                return Verdict.invalid(
                    "NONDEGENERATE_FIBER",
                    f"The core fiber over {list(coordinates)} is a segment met by the dense group",
                )
            if pointsets.dense_group_contains(descriptor.dense_generators, low):
                return Verdict.invalid(
                    "CORE_MEETS_SET", "The core point lies in S", offending_point=Point((*coordinates, low))
                )
    return None


def _fiber_extreme(
    heads: list[Point], tails: list[Scalar], group: list[int], base: Sequence[int], *, maximize: bool
) -> Scalar | None:
    """Extreme last coordinate of conv(group) over the integer base point."""

    ctx = context_for(tails[position] for position in group)
    equalities: list[tuple[list[Any], Any]] = [
        ([heads[position][axis] for position in group], base[axis]) for axis in range(len(base))
    ]
    equalities.append(([1] * len(group), 1))
    result = solve_general(
        ctx,
        len(group),
        equalities=equalities,
        objective=[tails[position] for position in group],
        maximize=maximize,
    )
    if result.status is not LPStatus.OPTIMAL:
        return None
    return ctx.demote(result.value)


def _extreme(values: list[Scalar], *, larger: bool) -> Scalar:
    best = values[0]
    for value in values[1:]:
        difference = sign(normalize(value - best))
        if (difference > 0) == larger and difference != 0:
            best = value
    return best


def _monochromatic_triangle(
    points: Sequence[Point],
    classes: Any,
    colors: dict[tuple[int, int], int | None],
    descriptor: LatticeDifferenceDescriptor,
) -> RamseyFinding:
    for members in classes:
        for first, second, third in itertools.combinations(members, 3):
            color = colors[(first, second)]
            if color is None or colors[(second, third)] != color or colors[(first, third)] != color:
                continue
            half = Fraction(1, 2)
            m1 = (points[first] + points[second]).scale(half)
            m2 = (points[second] + points[third]).scale(half)
            m3 = (points[third] + points[first]).scale(half)
            reconstruction = m1 - m2 + m3
            return RamseyFinding(
                kind="monochromatic-triangle",
                triangle=[first, second, third],
                color=color,
                reconstruction=reconstruction,
                reconstruction_in_lattice=pointsets.lattice_contains(
                    descriptor.removed[color], reconstruction.integer_coordinates()
                ),
            )
    return RamseyFinding(kind="clean")
