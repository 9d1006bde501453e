"""Branch-and-bound search for hollow vertex polytopes and brute-force Helly oracles."""

from __future__ import annotations

import itertools
import logging
import threading
import time
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from app.core.config import Settings, get_settings
from app.core.errors import BudgetExceededError, DomainError
from app.geometry.core import CorePolytope
from app.geometry.points import Point
from app.geometry.predicates import RationalHull, strict_convex_position
from app.models.descriptors import ExplicitFiniteDescriptor, LatticeDescriptor, SetDescriptor
from app.models.schemas import OracleReport, SearchOptions, SearchResult, SearchSummary
from app.services import pointsets_service as pointsets
from app.services.certify_service import CertifyService

logger = logging.getLogger(__name__)

Witness = tuple[Point, ...]


@dataclass
class _Incumbent:
    """Best size found by any worker; only ever increases."""

    size: int = 0
    lock: threading.Lock = field(default_factory=threading.Lock)
    stop: threading.Event = field(default_factory=threading.Event)

    def offer(self, size: int) -> None:
        with self.lock:
            if size > self.size:
                self.size = size
                logger.info("incumbent improved to %d", size)


@dataclass
class _BranchResult:
    best: Witness = ()
    maxima: list[Witness] = field(default_factory=list)
    nodes: int = 0


class _Explorer:
    """Depth-first extension of hollow sets in strict convex position, in lexicographic order.

    Both properties pass to subsets, so a child's candidates are the parent's candidates
    that stay compatible with the child.
    """

    def __init__(
        self,
        points: list[Point],
        options: SearchOptions,
        incumbent: _Incumbent,
        *,
        parity: bool,
        deadline: float | None,
        shared_ties: bool,
    ) -> None:
        self.points = points
        self.options = options
        self.incumbent = incumbent
        self.parity = parity
        self.deadline = deadline
        self.shared_ties = shared_ties
        self.result = _BranchResult()
        self._classes = [pointsets.parity_class(point) for point in points] if parity else []

    def run(self, root: int) -> _BranchResult:
        current = (self.points[root],)
        candidates = [index for index in range(root + 1, len(self.points)) if self.compatible(current, index)]
        self._visit(current, candidates, [root])
        return self.result

    def compatible(self, current: Witness, index: int) -> bool:
        return _is_hollow_vertex_set((*current, self.points[index]), self.points)

    def _visit(self, current: Witness, candidates: list[int], chosen: list[int]) -> None:
        self.result.nodes += 1
        if self.deadline is not None and time.perf_counter() > self.deadline:
            self.incumbent.stop.set()
        if self.incumbent.stop.is_set():
            return
        self._record(current)
        for position, index in enumerate(candidates):
            rest = candidates[position + 1 :]
            if self.prune(len(current) + 1 + len(rest)):
                break
            child = (*current, self.points[index])
            compatible = [
                other for other in rest if self._parity_free(chosen, index, other) and self.compatible(child, other)
            ]
            if self.prune(len(child) + self._capacity(compatible, chosen + [index])):
                continue
            self._visit(child, compatible, chosen + [index])
            if self.incumbent.stop.is_set():
                return

    def _parity_free(self, chosen: list[int], index: int, other: int) -> bool:
        if not self.parity:
            return True
        taken = {self._classes[position] for position in (*chosen, index)}
        return self._classes[other] not in taken

    def _capacity(self, candidates: list[int], chosen: list[int]) -> int:
        if not self.parity:
            return len(candidates)
        taken = {self._classes[position] for position in chosen}
        return min(len(candidates), len({self._classes[index] for index in candidates} - taken))

    def prune(self, bound: int) -> bool:
        if self.options.max_size_hint is not None:
            bound = min(bound, self.options.max_size_hint)
        local = len(self.result.best)
        if self.options.report_all_maxima:
            return bound < max(local, self.incumbent.size)
        if self.shared_ties:
            return bound <= local or bound < self.incumbent.size
        return bound <= max(local, self.incumbent.size)

    def _record(self, current: Witness) -> None:
        size, local = len(current), len(self.result.best)
        if size > local:
            self.result.best = current
            self.result.maxima = [current]
            self.incumbent.offer(size)
        elif size == local and self.options.report_all_maxima:
            self.result.maxima.append(current)


def _is_hollow_vertex_set(members: Sequence[Point], points: Sequence[Point]) -> bool:
    """Strict convex position and no other listed point inside the hull."""

    if not strict_convex_position(members):
        return False
    dimension = members[0].dimension
    low = [min(point[axis] for point in members) for axis in range(dimension)]
    high = [max(point[axis] for point in members) for axis in range(dimension)]
    hull: RationalHull | None = None
    taken = set(members)
    for point in points:
        if point in taken or not all(low[axis] <= point[axis] <= high[axis] for axis in range(dimension)):
            continue
        hull = hull or RationalHull(members)
        if hull.contains(point):
            return False
    return True


class SearchService:
    """Maximum S-vertex-polytopes in a window and exact Helly numbers of small finite sets."""

    def __init__(self, *, settings: Settings | None = None, certify_service: CertifyService | None = None) -> None:
        self.settings = settings or get_settings()
        self.certify_service = certify_service or CertifyService()

    def max_vertex_polytope(self, descriptor: SetDescriptor, options: SearchOptions) -> SearchResult:
        started = time.perf_counter()
        points = pointsets.enumerate_window(descriptor, options.window)
        deadline = started + options.time_limit if options.time_limit is not None else None
        parity = isinstance(descriptor, LatticeDescriptor) and descriptor.index == 1
        incumbent = _Incumbent()
        logger.info(
            "searching %d points of %s in %s with %d worker(s)",
            len(points),
            descriptor.kind,
            options.window,
            options.workers,
        )

        if options.workers == 1:
            explorer = _Explorer(
                points, options, incumbent, parity=parity, deadline=deadline, shared_ties=False
            )
            for root in range(len(points)):
                if explorer.prune(len(points) - root):
                    break
                explorer.run(root)
                if incumbent.stop.is_set():
                    break
            branches = [explorer.result]
        else:

            def explore(root: int) -> _BranchResult:
                explorer = _Explorer(points, options, incumbent, parity=parity, deadline=deadline, shared_ties=True)
                if explorer.prune(len(points) - root):
                    return explorer.result
                return explorer.run(root)

            with ThreadPoolExecutor(max_workers=options.workers) as executor:
                branches = list(executor.map(explore, range(len(points))))

        best, maxima = _reduce(branches)
        nodes = sum(branch.nodes for branch in branches)
        exhausted = not incumbent.stop.is_set()
        elapsed = time.perf_counter() - started
        logger.info("search explored %d nodes in %.2fs; best %d, exhausted=%s", nodes, elapsed, len(best), exhausted)

        certificate = None
        if best:
            certificate = self.certify_service.check_vertex_polytope(descriptor, list(best))
            if not certificate.verdict.is_valid:
                raise DomainError(f"Search produced a configuration that failed validation: {certificate.verdict}")
        return SearchResult(
            best=certificate,
            best_size=len(best),
            nodes_explored=nodes,
            exhausted=exhausted,
            elapsed_seconds=elapsed,
            all_maxima=[list(witness) for witness in maxima] if options.report_all_maxima else [],
        )

    def summary(self, result: SearchResult, options: SearchOptions) -> SearchSummary:
        return SearchSummary(
            nodes_explored=result.nodes_explored,
            elapsed_seconds=result.elapsed_seconds,
            exhausted=result.exhausted,
            workers=options.workers,
            window=str(options.window),
            best_size=result.best_size,
        )

    def _finite_points(self, descriptor: ExplicitFiniteDescriptor) -> list[Point]:
        if len(descriptor.points) > self.settings.oracle_budget:
            raise BudgetExceededError(
                f"{len(descriptor.points)} points exceed the oracle budget of {self.settings.oracle_budget}"
            )
        return sorted(descriptor.points)

    def helly_oracle_vertex(self, descriptor: ExplicitFiniteDescriptor) -> int:
        """Largest subset in strict convex position whose hull holds no other point of S."""

        points = self._finite_points(descriptor)
        for size in range(len(points), 1, -1):
            for subset in itertools.combinations(points, size):
                if _is_hollow_vertex_set(subset, points):
                    return size
        return 1

    def helly_oracle_hoffman(self, descriptor: ExplicitFiniteDescriptor) -> int:
        """Largest subset in strict convex position whose core avoids S."""

        points = self._finite_points(descriptor)
        for size in range(len(points), 1, -1):
            for subset in itertools.combinations(points, size):
                if not strict_convex_position(subset):
                    continue
                core = CorePolytope(subset)
                if core.is_empty() or not any(core.contains_fast(point) for point in points):
                    return size
        return 1

    def compare_oracles(self, descriptor: ExplicitFiniteDescriptor) -> OracleReport:
        vertex = self.helly_oracle_vertex(descriptor)
        hoffman = self.helly_oracle_hoffman(descriptor)
        if vertex != hoffman:
            logger.warning("oracles disagree: vertex=%d hoffman=%d", vertex, hoffman)
        return OracleReport(
            size=len(descriptor.points), vertex_oracle=vertex, hoffman_oracle=hoffman, agree=vertex == hoffman
        )


def _reduce(branches: list[_BranchResult]) -> tuple[Witness, list[Witness]]:
    """Largest size wins; ties go to the lexicographically smallest vertex list."""

    size = max((len(branch.best) for branch in branches), default=0)
    if size == 0:
        return (), []
    maxima = sorted({witness for branch in branches for witness in branch.maxima if len(witness) == size})
    return maxima[0], maxima
