"""Known upper and lower bounds on Helly numbers, with a trace of the rules applied."""

from __future__ import annotations

import itertools
import logging
from collections import Counter
from functools import lru_cache

from app.core.config import Settings, get_settings
from app.core.errors import DomainError, RamseyValueUnavailableError
from app.geometry import linalg
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
    descriptor_dimension,
    rational_rank,
)
from app.models.schemas import BoundReport, RamseyEntry, RamseyProvenance, RuleApplication
from app.services import pointsets_service as pointsets

logger = logging.getLogger(__name__)

# Anchors quote the statement each rule rests on, character for character.
HELLY = r"The original Helly number is $h(\mathbb{R}^d)=d+1$"
SUBFIELD = r"the $S$-Helly number of $S=\mathcal{F}^d$ is still $d+1$"
DOIGNON = r"if every $2^d$ of members of the family intersect at a point of $\mathbb{Z}^d$"
MIXED = r"this can be guaranteed if every $2^{d-k}(k+1)$ sets intersect in such a point"
LINE = r"If $S\subseteq\mathbb{R}$, then $h(S)=2$."
FINITE = r"when $S$ is finite then the bound $h(S)\le\#(S)$ is trivial"
DENSE_PLANAR = r"If $S$ is a dense subset of $\mathbb{R}^2$, then $h(S)\leq 4$. This result is sharp."
ONE_SUBLATTICE = r"If $S=\mathbb{Z}^2\setminus L$, then $h(S)\leq 6$. This result is sharp."
SUBLATTICES = r"has Helly number $h(S)\le C_k2^d$ for some constant $C_k$ depending only on $k$"
MODULE = r"If $S\subset \mathbb{R}^d$ is a $G$-module then $h(S)\le 2d$."
MODULE_SHARP = r"but $\bigcap\mathcal{F}=\{C\}$ does not intersect $S$; therefore $h(S)\ge 2d$."
GENERATED = r"From here Doignon's theorem implies that $h(S)\le 2^m$."
NINE_POINTS = r"and therefore $h(G)\ge 9$."
LATTICE_SLICE = r"to show that $h(S)\ge 2^{d-1}+2$."
LATTICE_TIMES = r"$h(\mathbb{Z}^d\times M)\ge 2^dh(M)$ for closed $M\subseteq\mathbb{R}^k$"
CROSS = r"taking $S=\mathbb{R}^2\setminus \{0\}$ and convex sets"
PRIME_GRID = r"We have been able to show that $h(\mathbb P^2) \ge 14$"
COMPOSITE_GRID = r"$h((\mathbb{Z} \setminus \mathbb P)^2)$ is finite"
UNION = r"then $h(S_1\cup S_2)\leq h(S_1)+h(S_2)$."
CYLINDER = r"If $M$ is a closed subset of $\mathbb{R}^k$ then $h(\mathbb{R}^d\times M)\le (d+1)h(M)$."
DISCRETE_PRODUCT = r"are discrete sets, then $h(S_1 \times S_2) \ge h(S_1)h(S_2)$."
FACE = r"when $S$ is a closed subset and $f(S)$ is finite, then $h(S) \leq (d+1) f(S)$"
ANCHORS = (
    HELLY,
    SUBFIELD,
    DOIGNON,
    MIXED,
    LINE,
    FINITE,
    DENSE_PLANAR,
    ONE_SUBLATTICE,
    SUBLATTICES,
    MODULE,
    MODULE_SHARP,
    GENERATED,
    NINE_POINTS,
    LATTICE_SLICE,
    LATTICE_TIMES,
    CROSS,
    PRIME_GRID,
    COMPOSITE_GRID,
    UNION,
    CYLINDER,
    DISCRETE_PRODUCT,
    FACE,
)

_LITERATURE_RAMSEY = {3: 17}


def _edges(order: int) -> list[tuple[int, int]]:
    return list(itertools.combinations(range(order), 2))


@lru_cache(maxsize=None)
def triangle_free_coloring(order: int, colors: int) -> tuple[int, ...] | None:
    """First edge coloring of K_order without a monochromatic triangle, in product order."""

    edges = _edges(order)
    position = {edge: index for index, edge in enumerate(edges)}
    triangles = [
        (position[(a, b)], position[(a, c)], position[(b, c)]) for a, b, c in itertools.combinations(range(order), 3)
    ]
    for coloring in itertools.product(range(colors), repeat=len(edges)):
        if not any(coloring[x] == coloring[y] == coloring[z] for x, y, z in triangles):
            return coloring
    return None


@lru_cache(maxsize=None)
def verified_ramsey(colors: int) -> int:
    """Smallest order forcing a monochromatic triangle, by scanning every coloring."""

    order = 3
    while triangle_free_coloring(order, colors) is not None:
        order += 1
    return order


def _is_standard_even(lattice: Sublattice) -> bool:
    """Whether the lattice is a translate of 2Z^d."""

    return lattice.index == 2 ** lattice.dimension and all(value % 2 == 0 for row in lattice.basis for value in row)


def _is_closed(descriptor: SetDescriptor) -> bool:
    if isinstance(descriptor, UnionDescriptor):
        return all(_is_closed(part) for part in descriptor.parts)
    if isinstance(descriptor, ProductDescriptor):
        return _is_closed(descriptor.left) and _is_closed(descriptor.right)
    if isinstance(descriptor, PuncturedSpaceDescriptor):
        return not descriptor.excluded
    return pointsets.is_discrete(descriptor) or isinstance(descriptor, MixedIntegerDescriptor)


def _continuous_dimension(descriptor: SetDescriptor) -> int | None:
    """k when the descriptor is R^k."""

    if isinstance(descriptor, PuncturedSpaceDescriptor) and not descriptor.excluded:
        return descriptor.dimension
    if isinstance(descriptor, MixedIntegerDescriptor) and descriptor.continuous == descriptor.dimension:
        return descriptor.dimension
    return None


def _integer_dimension(descriptor: SetDescriptor) -> int | None:
    """m when the descriptor is a lattice of rank m."""

    if isinstance(descriptor, LatticeDescriptor):
        return descriptor.dimension
    if isinstance(descriptor, MixedIntegerDescriptor) and descriptor.continuous == 0:
        return descriptor.dimension
    return None


def _rational_full_rank(descriptor: QModuleDescriptor) -> bool:
    if not all(generator.is_rational for generator in descriptor.generators):
        return False
    rows = [list(generator.coordinates) for generator in descriptor.generators]
    return linalg.rank(RATIONAL, rows) == descriptor.dimension


def _real_rank(descriptor: QModuleDescriptor) -> int:
    generators = descriptor.generators
    ctx = context_for(value for generator in generators for value in generator.coordinates)
    return linalg.rank(ctx, [[ctx.coerce(value) for value in generator.coordinates] for generator in generators])


def _sharpness_centre(descriptor: QModuleDescriptor) -> Point | None:
    """The centre when each generator moves exactly one of its coordinates, two per axis on opposite sides."""

    dimension = descriptor.dimension
    generators = descriptor.generators
    if dimension < 2 or len(generators) != 2 * dimension:
        return None
    centre = []
    for axis in range(dimension):
        value, count = Counter(generator[axis] for generator in generators).most_common(1)[0]
        if count != 2 * dimension - 2:
            return None
        centre.append(value)
    for axis in range(dimension):
        moved = [generator for generator in generators if generator[axis] != centre[axis]]
        if len(moved) != 2:
            return None
        if any(generator[other] != centre[other] for generator in moved for other in range(dimension) if other != axis):
            return None
        low, high = sorted(generator[axis] for generator in moved)
        if not low < centre[axis] < high:
            return None
    point = Point(centre)
    if pointsets.contains(descriptor, point):
        return None
    return point


class BoundsService:
    """Theorem table for h(S) and small Ramsey constants."""

    def __init__(self, *, settings: Settings | None = None) -> None:
        self.settings = settings or get_settings()

    def ramsey(self, colors: int) -> RamseyEntry:
        if colors < 1:
            raise RamseyValueUnavailableError(f"Ramsey numbers need at least one color, got {colors}")
        if colors <= 2:
            value = verified_ramsey(colors)
            note = f"every {colors}-coloring of K_{value} has a monochromatic triangle"
            witness = triangle_free_coloring(value - 1, colors)
            if witness is not None:
                note += f"; K_{value - 1} has a triangle-free coloring {list(witness)}"
            return RamseyEntry(k=colors, value=value, provenance=RamseyProvenance.VERIFIED, note=note)
        if colors in _LITERATURE_RAMSEY:
            return RamseyEntry(
                k=colors,
                value=_LITERATURE_RAMSEY[colors],
                provenance=RamseyProvenance.LITERATURE,
                note="not verified locally",
            )
        override = self.settings.ramsey_overrides.get(colors)
        if override is None:
            raise RamseyValueUnavailableError(
                f"R_{colors} is not known; supply it through HELLY_RAMSEY_OVERRIDES"
            )
        previous = self.ramsey(colors - 1).value
        if override < previous:
            raise RamseyValueUnavailableError(f"Override R_{colors}={override} is below R_{colors - 1}={previous}")
        return RamseyEntry(k=colors, value=override, provenance=RamseyProvenance.OVERRIDE, note="user supplied")

    def upper_bound(self, descriptor: SetDescriptor, *, face_bound: int | None = None) -> BoundReport:
        trace = self._upper_rules(descriptor)
        if face_bound is not None and _is_closed(descriptor):
            trace.append(
                RuleApplication(
                    rule="face", anchor=FACE, value=(descriptor_dimension(descriptor) + 1) * face_bound
                )
            )
        finite_unknown = any(rule.applies and rule.value is None for rule in trace)
        best = min((rule for rule in trace if rule.value is not None), key=lambda rule: rule.value, default=None)
        if best is None:
            logger.info("no upper bound known for %s", descriptor.kind)
        return BoundReport(
            descriptor=descriptor,
            upper=best.value if best else None,
            upper_rule=best.rule if best else None,
            upper_finite_unknown=finite_unknown and best is None,
            rule_trace=trace,
        )

    def known_lower_bound(self, descriptor: SetDescriptor) -> BoundReport:
        trace = self._lower_rules(descriptor)
        best = max((rule for rule in trace if rule.value is not None), key=lambda rule: rule.value, default=None)
        return BoundReport(
            descriptor=descriptor,
            lower=best.value if best else None,
            lower_source=best.rule if best else None,
            rule_trace=trace,
        )

    def report(
        self,
        descriptor: SetDescriptor,
        *,
        face_bound: int | None = None,
        certified_lower: int | None = None,
    ) -> BoundReport:
        """Both bounds; a certified lower bound replaces a weaker theorem bound."""

        upper = self.upper_bound(descriptor, face_bound=face_bound)
        lower = self.known_lower_bound(descriptor)
        value, source = lower.lower, lower.lower_source
        if certified_lower is not None and (value is None or certified_lower > value):
            value, source = certified_lower, "certificate"
        if value is not None and upper.upper is not None and value > upper.upper:
            raise DomainError(f"Lower bound {value} ({source}) exceeds upper bound {upper.upper} ({upper.upper_rule})")
        return upper.model_copy(
            update={"lower": value, "lower_source": source, "rule_trace": upper.rule_trace + lower.rule_trace}
        )

    def _upper_rules(self, descriptor: SetDescriptor) -> list[RuleApplication]:
        dimension = descriptor_dimension(descriptor)
        rules: list[RuleApplication] = []
        if dimension == 1:
            rules.append(RuleApplication(rule="line", anchor=LINE, value=2))

        if isinstance(descriptor, LatticeDescriptor):
            rules.append(RuleApplication(rule="doignon", anchor=DOIGNON, value=2**dimension))
        elif isinstance(descriptor, MixedIntegerDescriptor):
            continuous = descriptor.continuous
            rules.append(
                RuleApplication(rule="mixed", anchor=MIXED, value=2 ** (dimension - continuous) * (continuous + 1))
            )
        elif isinstance(descriptor, RationalSpaceDescriptor):
            rules.append(RuleApplication(rule="subfield", anchor=SUBFIELD, value=dimension + 1))
        elif isinstance(descriptor, ExplicitFiniteDescriptor):
            rules.append(RuleApplication(rule="finite", anchor=FINITE, value=len(descriptor.points)))
        elif isinstance(descriptor, LatticeDifferenceDescriptor):
            rules.extend(self._lattice_difference_rules(descriptor))
        elif isinstance(descriptor, ComplementOfPrimesDescriptor):
            if dimension == 2:
                rules.append(
                    RuleApplication(rule="composite_grid", anchor=COMPOSITE_GRID, note="finite, value unknown")
                )
        elif isinstance(descriptor, PuncturedSpaceDescriptor):
            if not descriptor.excluded:
                rules.append(RuleApplication(rule="helly", anchor=HELLY, value=dimension + 1))
            if dimension == 2:
                rules.append(RuleApplication(rule="dense_planar", anchor=DENSE_PLANAR, value=4))
        elif isinstance(descriptor, QModuleDescriptor):
            rules.append(RuleApplication(rule="module", anchor=MODULE, value=2 * dimension))
            if _rational_full_rank(descriptor):
                rules.append(RuleApplication(rule="subfield", anchor=SUBFIELD, value=dimension + 1))
            elif dimension == 2 and _real_rank(descriptor) == 2:
                rules.append(RuleApplication(rule="dense_planar", anchor=DENSE_PLANAR, value=4))
        elif isinstance(descriptor, DiscreteDenseProductDescriptor):
            generators = descriptor.integer_dimension + len(descriptor.dense_generators)
            rules.append(RuleApplication(rule="finitely_generated", anchor=GENERATED, value=2**generators))
        elif isinstance(descriptor, UnionDescriptor):
            parts = [self.upper_bound(part).upper for part in descriptor.parts]
            if all(value is not None for value in parts):
                rules.append(RuleApplication(rule="union", anchor=UNION, value=sum(parts)))
        elif isinstance(descriptor, ProductDescriptor):
            rules.extend(self._product_upper_rules(descriptor))
        return rules

    def _lattice_difference_rules(self, descriptor: LatticeDifferenceDescriptor) -> list[RuleApplication]:
        dimension, count = descriptor.dimension, len(descriptor.removed)
        rules = []
        if dimension == 2 and count == 1:
            rules.append(RuleApplication(rule="one_sublattice", anchor=ONE_SUBLATTICE, value=6))
        try:
            entry = self.ramsey(count)
        except RamseyValueUnavailableError as exc:
            rules.append(RuleApplication(rule="sublattices", anchor=SUBLATTICES, applies=False, note=str(exc)))
        else:
            rules.append(
                RuleApplication(
                    rule="sublattices",
                    anchor=SUBLATTICES,
                    value=(entry.value - 1) * 2**dimension,
                    note=f"R_{count}={entry.value} ({entry.provenance.value})",
                )
            )
        return rules

    def _product_upper_rules(self, descriptor: ProductDescriptor) -> list[RuleApplication]:
        rules = []
        left, right = descriptor.left, descriptor.right
        for flat, other in ((left, right), (right, left)):
            continuous = _continuous_dimension(flat)
            if continuous is None or not _is_closed(other):
                continue
            inner = self.upper_bound(other).upper
            if inner is not None:
                rules.append(RuleApplication(rule="cylinder", anchor=CYLINDER, value=(continuous + 1) * inner))
        mixed = self._mixed_product(descriptor)
        if mixed is not None:
            rules.append(mixed)
        return rules

    def _mixed_product(self, descriptor: ProductDescriptor) -> RuleApplication | None:
        """Products of lattices and real spaces are Z^m x R^k up to a coordinate permutation."""

        integer, continuous = 0, 0
        for part in (descriptor.left, descriptor.right):
            if (rank := _integer_dimension(part)) is not None:
                integer += rank
            elif (rank := _continuous_dimension(part)) is not None:
                continuous += rank
            elif isinstance(part, MixedIntegerDescriptor):
                integer += part.dimension - part.continuous
                continuous += part.continuous
            else:
                return None
        if continuous == 0:
            return RuleApplication(rule="doignon", anchor=DOIGNON, value=2**integer)
        return RuleApplication(rule="mixed", anchor=MIXED, value=2**integer * (continuous + 1))

    def _lower_rules(self, descriptor: SetDescriptor) -> list[RuleApplication]:
        dimension = descriptor_dimension(descriptor)
        rules: list[RuleApplication] = []
        if dimension == 1 and not (isinstance(descriptor, ExplicitFiniteDescriptor) and len(descriptor.points) < 2):
            rules.append(RuleApplication(rule="line", anchor=LINE, value=2))

        if isinstance(descriptor, LatticeDescriptor):
            rules.append(RuleApplication(rule="doignon", anchor=DOIGNON, value=2**dimension))
        elif isinstance(descriptor, MixedIntegerDescriptor):
            continuous = descriptor.continuous
            rules.append(
                RuleApplication(rule="mixed", anchor=MIXED, value=2 ** (dimension - continuous) * (continuous + 1))
            )
        elif isinstance(descriptor, RationalSpaceDescriptor):
            rules.append(RuleApplication(rule="subfield", anchor=SUBFIELD, value=dimension + 1))
        elif isinstance(descriptor, LatticeDifferenceDescriptor):
            if dimension == 2 and len(descriptor.removed) == 1 and _is_standard_even(descriptor.removed[0]):
                rules.append(RuleApplication(rule="one_sublattice", anchor=ONE_SUBLATTICE, value=6))
        elif isinstance(descriptor, PrimeGridDescriptor):
            if dimension == 2:
                rules.append(RuleApplication(rule="prime_grid", anchor=PRIME_GRID, value=14))
        elif isinstance(descriptor, PuncturedSpaceDescriptor):
            if descriptor.excluded:
                rules.append(RuleApplication(rule="cross", anchor=CROSS, value=2 * dimension))
            else:
                rules.append(RuleApplication(rule="helly", anchor=HELLY, value=dimension + 1))
        elif isinstance(descriptor, QModuleDescriptor):
            if _rational_full_rank(descriptor):
                rules.append(RuleApplication(rule="subfield", anchor=SUBFIELD, value=dimension + 1))
            elif (centre := _sharpness_centre(descriptor)) is not None:
                rules.append(
                    RuleApplication(
                        rule="module_sharp", anchor=MODULE_SHARP, value=2 * dimension, note=f"centre {centre}"
                    )
                )
        elif isinstance(descriptor, DiscreteDenseProductDescriptor):
            lattice = descriptor.integer_dimension
            rules.append(RuleApplication(rule="lattice_slice", anchor=LATTICE_SLICE, value=2**lattice + 2))
            rules.append(
                RuleApplication(
                    rule="lattice_pairs",
                    anchor=LATTICE_TIMES,
                    value=2 ** (lattice + 1),
                    note="two points of the dense group over each vertex of the unit cube; Hoffman certificate",
                )
            )
            if lattice == 2 and rational_rank(descriptor.dense_generators) >= 3:
                rules.append(
                    RuleApplication(
                        rule="nine_points",
                        anchor=NINE_POINTS,
                        applies=False,
                        note="singles over a triangle with pairs beyond its edges fail the fiber check for any offsets",
                    )
                )
        elif isinstance(descriptor, ProductDescriptor):
            rules.extend(self._product_lower_rules(descriptor))
        return rules

    def _product_lower_rules(self, descriptor: ProductDescriptor) -> list[RuleApplication]:
        rules = []
        mixed = self._mixed_product(descriptor)
        if mixed is not None:
            rules.append(mixed)
        if pointsets.is_discrete(descriptor.left) and pointsets.is_discrete(descriptor.right):
            left = self.known_lower_bound(descriptor.left).lower
            right = self.known_lower_bound(descriptor.right).lower
            if left is not None and right is not None:
                rules.append(RuleApplication(rule="discrete_product", anchor=DISCRETE_PRODUCT, value=left * right))
        return rules
