"""SVG figures of planar certificates and lattice differences."""

from __future__ import annotations

import itertools
import logging
import math
from collections.abc import Sequence
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.axes import Axes  # noqa: E402
from matplotlib.patches import Polygon as PolygonPatch  # noqa: E402

from app.core.config import Settings, get_settings  # noqa: E402
from app.core.errors import DimensionMismatchError, UnsupportedDimensionError  # noqa: E402
from app.geometry.core import CorePolytope  # noqa: E402
from app.geometry.numbers import to_float  # noqa: E402
from app.geometry.points import HalfSpace, Point  # noqa: E402
from app.geometry.predicates import convex_hull_2d  # noqa: E402
from app.models.descriptors import (  # noqa: E402
    LatticeDifferenceDescriptor,
    SetDescriptor,
    Window,
    descriptor_dimension,
)
from app.models.schemas import CertificateFile, CertificateKind  # noqa: E402
from app.services import pointsets_service as pointsets  # noqa: E402

logger = logging.getLogger(__name__)

_DPI = 72
_PALETTE = ("#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")


class RenderService:
    """Draws two-dimensional configurations as scalable vector graphics."""

    def __init__(self, *, settings: Settings | None = None) -> None:
        self.settings = settings or get_settings()

    def render_certificate(self, certificate: CertificateFile, output: Path) -> Path:
        """Vertices, hull, Hoffman core and the points of S in the window."""

        dimension = descriptor_dimension(certificate.descriptor)
        if dimension != 2:
            raise UnsupportedDimensionError(f"Only planar certificates can be drawn, got dimension {dimension}")

        if certificate.kind is CertificateKind.FACE_POLYTOPE:
            outline = _face_vertices(certificate.halfspaces)
        else:
            outline = [_floats(point) for point in _hull(certificate.points)]
        window = self._window(certificate, outline)

        figure, axes = self._figure(window)
        self._background(axes, certificate.descriptor, window)
        if len(outline) >= 2:
            axes.add_patch(PolygonPatch(outline, closed=True, fill=False, edgecolor="#1f77b4", linewidth=1.5))
        if certificate.kind is CertificateKind.HOFFMAN:
            core = _core_polygon(certificate.points)
            if len(core) >= 3:
                axes.add_patch(PolygonPatch(core, closed=True, facecolor="#ff7f0e", alpha=0.35, edgecolor="none"))
            elif core:
                xs, ys = zip(*core)
                axes.plot(xs, ys, color="#ff7f0e", marker="x", linewidth=2.0)
        if certificate.points:
            xs, ys = zip(*(_floats(point) for point in certificate.points))
            axes.scatter(xs, ys, s=36, color="#d62728", zorder=3)
        axes.set_title(f"{certificate.kind.value}, bound {certificate.claimed_bound}")
        return self._save(figure, output)

    def render_lattice_difference(self, descriptor: LatticeDifferenceDescriptor, window: Window, output: Path) -> Path:
        """Points of Z^2 coloured by the first removed sublattice that contains them."""

        if descriptor.dimension != 2:
            raise UnsupportedDimensionError(f"Only planar sets can be drawn, got dimension {descriptor.dimension}")
        if window.dimension != 2:
            raise DimensionMismatchError(f"Window of dimension {window.dimension} for a planar set")

        figure, axes = self._figure(window)
        groups: dict[int | None, list[tuple[int, ...]]] = {}
        for coordinates in window.integer_points():
            groups.setdefault(pointsets.removed_index(descriptor, coordinates), []).append(coordinates)
        for index, members in sorted(groups.items(), key=lambda item: -1 if item[0] is None else item[0]):
            xs, ys = zip(*members)
            if index is None:
                axes.scatter(xs, ys, s=16, color="black", label="kept")
            else:
                color = _PALETTE[index % len(_PALETTE)]
                axes.scatter(xs, ys, s=16, facecolors="none", edgecolors=color, label=f"removed by L{index + 1}")
        axes.legend(loc="upper right", fontsize="small")
        return self._save(figure, output)

    def _window(self, certificate: CertificateFile, outline: Sequence[tuple[float, float]]) -> Window:
        if certificate.metadata.window:
            return Window.parse(certificate.metadata.window)
        if not outline:
            return Window.cube(2, -1, 1)
        lower = [math.floor(min(vertex[axis] for vertex in outline)) - 1 for axis in range(2)]
        upper = [math.ceil(max(vertex[axis] for vertex in outline)) + 1 for axis in range(2)]
        return Window(lower=lower, upper=upper)

    def _figure(self, window: Window) -> tuple[plt.Figure, Axes]:
        scale = self.settings.render_scale
        width = (window.upper[0] - window.lower[0] + 1) * scale / _DPI
        height = (window.upper[1] - window.lower[1] + 1) * scale / _DPI
        figure, axes = plt.subplots(figsize=(max(width, 2.0), max(height, 2.0)), dpi=_DPI)
        axes.set_xlim(window.lower[0] - 0.5, window.upper[0] + 0.5)
        axes.set_ylim(window.lower[1] - 0.5, window.upper[1] + 0.5)
        axes.set_aspect("equal")
        axes.grid(True, linewidth=0.3, alpha=0.5)
        return figure, axes

    def _background(self, axes: Axes, descriptor: SetDescriptor, window: Window) -> None:
        if not pointsets.is_discrete(descriptor):
            logger.info("%s is not enumerable, drawing no background points", descriptor.kind)
            return
        points = pointsets.enumerate_window(descriptor, window)
        if points:
            xs, ys = zip(*(_floats(point) for point in points))
            axes.scatter(xs, ys, s=10, color="#7f7f7f", zorder=1)

    def _save(self, figure: plt.Figure, output: Path) -> Path:
        output.parent.mkdir(parents=True, exist_ok=True)
        try:
            figure.savefig(output, format="svg", bbox_inches="tight")
        finally:
            plt.close(figure)
        logger.info("wrote %s", output)
        return output


def _floats(point: Point) -> tuple[float, float]:
    return to_float(point[0]), to_float(point[1])


def _hull(points: Sequence[Point]) -> list[Point]:
    if all(point.is_rational for point in points):
        return convex_hull_2d(points)
    # Irrational coordinates: order by angle around the centroid instead.
    floats = [_floats(point) for point in points]
    cx = sum(x for x, _ in floats) / len(floats)
    cy = sum(y for _, y in floats) / len(floats)
    order = sorted(range(len(points)), key=lambda i: math.atan2(floats[i][1] - cy, floats[i][0] - cx))
    return [points[i] for i in order]


def _core_polygon(points: Sequence[Point]) -> list[tuple[float, float]]:
    try:
        return [_floats(vertex) for vertex in CorePolytope(points).polygon()]
    except DimensionMismatchError:
        logger.info("core of irrational generators is not drawn")
        return []


def _face_vertices(halfspaces: Sequence[HalfSpace]) -> list[tuple[float, float]]:
    """Approximate vertices of a planar half-space intersection, counter-clockwise."""

    rows = [([float(value) for value in halfspace.normal], to_float(halfspace.offset)) for halfspace in halfspaces]
    vertices = []
    for (a, p), (b, q) in itertools.combinations(rows, 2):
        determinant = a[0] * b[1] - a[1] * b[0]
        if abs(determinant) < 1e-12:
            continue
        x = (p * b[1] - q * a[1]) / determinant
        y = (a[0] * q - b[0] * p) / determinant
        if all(n[0] * x + n[1] * y <= c + 1e-9 for n, c in rows):
            vertices.append((x, y))
    if not vertices:
        return []
    cx = sum(x for x, _ in vertices) / len(vertices)
    cy = sum(y for _, y in vertices) / len(vertices)
    unique = {(round(x, 9), round(y, 9)) for x, y in vertices}
    return sorted(unique, key=lambda vertex: math.atan2(vertex[1] - cy, vertex[0] - cx))
