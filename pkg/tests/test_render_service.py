from __future__ import annotations

from pathlib import Path

import pytest

from app.core.config import Settings
from app.core.errors import UnsupportedDimensionError
from app.geometry.points import HalfSpace, Point
from app.models.descriptors import (
    LatticeDescriptor,
    LatticeDifferenceDescriptor,
    PuncturedSpaceDescriptor,
    Sublattice,
    Window,
)
from app.models.schemas import CertificateFile, CertificateKind, CertificateMetadata
from app.services.render_service import RenderService


def _build_service() -> RenderService:
    return RenderService(settings=Settings(HELLY_RENDER_SCALE=20.0))


def _read_svg(path: Path) -> str:
    text = path.read_text(encoding="utf-8")
    assert "<svg" in text
    return text


def test_vertex_certificate_with_window(tmp_path: Path) -> None:
    certificate = CertificateFile(
        descriptor=LatticeDescriptor.standard(2),
        kind=CertificateKind.VERTEX_POLYTOPE,
        points=[Point((0, 0)), Point((1, 0)), Point((1, 1)), Point((0, 1))],
        claimed_bound=4,
        metadata=CertificateMetadata(window="-1:2,-1:2"),
    )
    output = _build_service().render_certificate(certificate, tmp_path / "square.svg")
    assert output.exists()
    _read_svg(output)


def test_hoffman_certificate_draws_core(tmp_path: Path) -> None:
    certificate = CertificateFile(
        descriptor=PuncturedSpaceDescriptor(dimension=2, excluded=[["0", "0"]]),
        kind=CertificateKind.HOFFMAN,
        points=[Point((1, 0)), Point((0, 1)), Point((-1, 0)), Point((0, -1))],
        claimed_bound=4,
    )
    output = _build_service().render_certificate(certificate, tmp_path / "nested" / "cross.svg")
    _read_svg(output)


def test_face_certificate(tmp_path: Path) -> None:
    diamond = [HalfSpace((1, 1), 2), HalfSpace((-1, -1), 0), HalfSpace((1, -1), 1), HalfSpace((-1, 1), 1)]
    certificate = CertificateFile(
        descriptor=LatticeDescriptor.standard(2),
        kind=CertificateKind.FACE_POLYTOPE,
        halfspaces=diamond,
        claimed_bound=4,
    )
    _read_svg(_build_service().render_certificate(certificate, tmp_path / "diamond.svg"))


def test_non_planar_certificate_is_rejected(tmp_path: Path) -> None:
    certificate = CertificateFile(
        descriptor=LatticeDescriptor.standard(3),
        kind=CertificateKind.VERTEX_POLYTOPE,
        points=[Point((0, 0, 0)), Point((1, 0, 0))],
        claimed_bound=2,
    )
    with pytest.raises(UnsupportedDimensionError):
        _build_service().render_certificate(certificate, tmp_path / "cube.svg")
    assert not (tmp_path / "cube.svg").exists()


def test_lattice_difference_figure(tmp_path: Path) -> None:
    descriptor = LatticeDifferenceDescriptor(
        dimension=2,
        removed=[Sublattice(basis=[[2, 0], [0, 2]]), Sublattice(basis=[[3, 0], [0, 3]], translate=[1, 1])],
    )
    output = _build_service().render_lattice_difference(descriptor, Window.cube(2, -3, 3), tmp_path / "diff.svg")
    _read_svg(output)
