"""Command-line entry points."""

from __future__ import annotations

import json
import logging
from collections.abc import Iterator
from contextlib import contextmanager
from datetime import datetime, timezone
from pathlib import Path
from typing import Annotated, Optional, TypeVar

import typer
from pydantic import BaseModel, ValidationError

from app import __version__
from app.core.config import get_settings
from app.core.errors import DomainError, FileFormatError, InvalidDescriptorError, domain_error_to_exit
from app.models.descriptors import (
    DescriptorFile,
    ExplicitFiniteDescriptor,
    LatticeDifferenceDescriptor,
    Window,
    descriptor_dimension,
    dump_point,
)
from app.models.schemas import (
    FORMAT_VERSION,
    CertificateFile,
    CertificateMetadata,
    ColoredInstance,
    MeetsSet,
    SearchOptions,
    VerdictStatus,
)
from app.services.bounds_service import BoundsService
from app.services.certify_service import CertifyService
from app.services.colorful_service import ColorfulService
from app.services.render_service import RenderService
from app.services.search_service import SearchService

logger = logging.getLogger(__name__)

EXIT_INVALID = 2
EXIT_UNDECIDED = 3
EXIT_NOT_EXHAUSTED = 4

Model = TypeVar("Model", bound=BaseModel)

app = typer.Typer(help="Exact certificates and theorem bounds for S-Helly numbers.", no_args_is_help=True)

SetOption = Annotated[Path, typer.Option("--set", help="Descriptor file of the set S.", exists=True, dir_okay=False)]
OutOption = Annotated[Optional[Path], typer.Option("--out", help="Output file; stdout when omitted.")]


def _window(text: str) -> Window:
    try:
        return Window.parse(text)
    except ValueError as exc:
        raise typer.BadParameter(f"expected lo:hi[,lo:hi...] with integer bounds ({exc})") from exc


WindowOption = Annotated[str, typer.Option("--window", help='Inclusive integer box, e.g. "0:4,0:4".')]


@contextmanager
def _domain_errors() -> Iterator[None]:
    try:
        yield
    except DomainError as exc:
        code, payload = domain_error_to_exit(exc)
        typer.echo(json.dumps(payload), err=True)
        raise typer.Exit(code) from exc


def _load(model: type[Model], path: Path) -> Model:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FileFormatError(f"Cannot read {path}: {exc}") from exc
    try:
        loaded = model.model_validate_json(text)
    except ValidationError as exc:
        raise FileFormatError(f"{path} is not a valid {model.__name__} ({exc.error_count()} error(s)): {exc}") from exc
    version = getattr(loaded, "version", FORMAT_VERSION)
    if version != FORMAT_VERSION:
        raise FileFormatError(f"{path} has format version {version}, expected {FORMAT_VERSION}")
    return loaded


def _emit(payload: BaseModel, out: Path | None, **dump: object) -> None:
    text = payload.model_dump_json(indent=2, **dump)
    if out is None:
        typer.echo(text)
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text + "\n", encoding="utf-8")
    logger.info("wrote %s", out)


@app.callback()
def configure(
    verbose: Annotated[bool, typer.Option("--verbose", "-v", help="Log at DEBUG level.")] = False,
) -> None:
    level = "DEBUG" if verbose else get_settings().log_level.upper()
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


@app.command()
def bound(
    set_file: SetOption,
    face_bound: Annotated[Optional[int], typer.Option("--face-bound", min=1, help="Certified f(S).")] = None,
    certificate: Annotated[
        Optional[Path], typer.Option("--certificate", exists=True, dir_okay=False, help="Lower-bound certificate.")
    ] = None,
    out: OutOption = None,
) -> None:
    """Upper and lower bounds from the theorem table."""

    with _domain_errors():
        descriptor = _load(DescriptorFile, set_file).descriptor
        certified = None
        if certificate is not None:
            loaded = _load(CertificateFile, certificate)
            if loaded.descriptor != descriptor:
                raise InvalidDescriptorError("The certificate is for a different set")
            checked = CertifyService().check(loaded.configuration, loaded.claimed_bound)
            if checked.verdict.is_valid:
                certified = checked.claimed_bound
            else:
                logger.warning("ignoring certificate: %s", checked.verdict.message)
        report = BoundsService().report(descriptor, face_bound=face_bound, certified_lower=certified)
        _emit(report, out)


@app.command()
def search(
    set_file: SetOption,
    window: WindowOption,
    threads: Annotated[Optional[int], typer.Option("--threads", min=1, help="Worker threads.")] = None,
    time_limit: Annotated[Optional[float], typer.Option("--time-limit", min=0.0, help="Seconds.")] = None,
    max_size: Annotated[Optional[int], typer.Option("--max-size", min=1, help="Known size cap.")] = None,
    all_maxima: Annotated[bool, typer.Option("--all-maxima", help="List every maximum witness.")] = False,
    out: Annotated[Optional[Path], typer.Option("--out", help="Certificate file.")] = None,
) -> None:
    """Largest hollow S-vertex-polytope in a window, written as a certificate."""

    with _domain_errors():
        settings = get_settings()
        descriptor = _load(DescriptorFile, set_file).descriptor
        options = SearchOptions(
            window=_window(window),
            max_size_hint=max_size,
            time_limit=time_limit or None,
            workers=threads or settings.workers,
            report_all_maxima=all_maxima,
        )
        service = SearchService(settings=settings)
        result = service.max_vertex_polytope(descriptor, options)
        summary = service.summary(result, options)
        if result.best is not None:
            created_at = datetime.now(timezone.utc).isoformat(timespec="seconds")
            target = out or settings.output_directory / f"{descriptor.kind}-{result.best_size}.json"
            certificate = CertificateFile(
                descriptor=descriptor,
                kind=result.best.configuration.kind,
                points=result.best.configuration.points,
                claimed_bound=result.best.claimed_bound,
                metadata=CertificateMetadata(
                    window=summary.window,
                    nodes_explored=summary.nodes_explored,
                    elapsed_seconds=summary.elapsed_seconds,
                    exhausted=summary.exhausted,
                    created_at=created_at,
                ),
            )
            _emit(certificate, target)
        _emit(summary, None, exclude={"elapsed_seconds"})
        for witness in result.all_maxima:
            typer.echo(json.dumps([dump_point(point) for point in witness]))
    if not result.exhausted:
        raise typer.Exit(EXIT_NOT_EXHAUSTED)


@app.command()
def check(
    certificate: Annotated[Path, typer.Argument(exists=True, dir_okay=False, help="Certificate file.")],
) -> None:
    """Validate a certificate: exit 0 valid, 2 invalid, 3 undecided."""

    with _domain_errors():
        loaded = _load(CertificateFile, certificate)
        checked = CertifyService().check(loaded.configuration, loaded.claimed_bound)
        _emit(checked.verdict, None, exclude_none=True)
    if checked.verdict.status is VerdictStatus.INVALID:
        raise typer.Exit(EXIT_INVALID)
    if checked.verdict.status is VerdictStatus.UNDECIDED:
        raise typer.Exit(EXIT_UNDECIDED)


@app.command()
def oracle(
    points_file: Annotated[Path, typer.Argument(exists=True, dir_okay=False, help="Explicit finite descriptor.")],
) -> None:
    """Exact Helly number of a small finite set by both oracles; exit 2 on disagreement."""

    with _domain_errors():
        descriptor = _load(DescriptorFile, points_file).descriptor
        if not isinstance(descriptor, ExplicitFiniteDescriptor):
            raise InvalidDescriptorError(f"The oracles need an explicit finite set, got {descriptor.kind}")
        report = SearchService().compare_oracles(descriptor)
        _emit(report, None)
    if not report.agree:
        raise typer.Exit(EXIT_INVALID)


@app.command()
def colorful(
    set_file: Annotated[
        Optional[Path], typer.Option("--set", exists=True, dir_okay=False, help="Descriptor file of the set S.")
    ] = None,
    colors: Annotated[Optional[int], typer.Option("--colors", min=1, help="Color classes; 2^d by default.")] = None,
    trials: Annotated[int, typer.Option("--trials", min=1)] = 100,
    seed: Annotated[int, typer.Option("--seed")] = 0,
    family_size: Annotated[int, typer.Option("--family-size", min=1)] = 3,
    instance: Annotated[
        Optional[Path], typer.Option("--instance", exists=True, dir_okay=False, help="Re-check one saved instance.")
    ] = None,
    out: OutOption = None,
) -> None:
    """Randomized colorful Helly trials; exit 2 when a counterexample is found."""

    with _domain_errors():
        settings = get_settings()
        service = ColorfulService(settings=settings)
        if instance is not None:
            outcome = service.check_colorable_instance(_load(ColoredInstance, instance))
            _emit(outcome, out, exclude_none=True)
            failed = outcome.kind == "counterexample"
        else:
            if set_file is None:
                raise typer.BadParameter("--set is required unless --instance is given")
            descriptor = _load(DescriptorFile, set_file).descriptor
            report = service.run_trials(
                trials,
                seed=seed,
                dimension=descriptor_dimension(descriptor),
                colors=colors,
                family_size=family_size,
                workers=1,
                prop=MeetsSet(descriptor=descriptor),
            )
            for counterexample in report.counterexamples:
                dump = settings.output_directory / f"counterexample-{counterexample.seed}.json"
                _emit(counterexample, dump)
                logger.error("counterexample written to %s", dump)
            _emit(report, out)
            failed = bool(report.counterexamples)
    if failed:
        raise typer.Exit(EXIT_INVALID)


@app.command()
def ramsey(k: Annotated[int, typer.Argument(min=1, help="Number of colors.")]) -> None:
    """R(3,...,3) with k colors and its provenance."""

    with _domain_errors():
        _emit(BoundsService().ramsey(k), None, exclude_none=True)


@app.command()
def render(
    certificate: Annotated[Path, typer.Argument(exists=True, dir_okay=False, help="Certificate file.")],
    out: Annotated[Optional[Path], typer.Option("--out", help="SVG file.")] = None,
) -> None:
    """Planar certificate figure as SVG."""

    with _domain_errors():
        loaded = _load(CertificateFile, certificate)
        target = out or get_settings().output_directory / f"{certificate.stem}.svg"
        typer.echo(str(RenderService().render_certificate(loaded, target)))


@app.command("render-lattice")
def render_lattice(
    set_file: SetOption,
    window: WindowOption,
    out: Annotated[Optional[Path], typer.Option("--out", help="SVG file.")] = None,
) -> None:
    """Planar lattice difference coloured by removed sublattice."""

    with _domain_errors():
        descriptor = _load(DescriptorFile, set_file).descriptor
        if not isinstance(descriptor, LatticeDifferenceDescriptor):
            raise InvalidDescriptorError(f"Expected a lattice difference, got {descriptor.kind}")
        target = out or get_settings().output_directory / f"{set_file.stem}.svg"
        typer.echo(str(RenderService().render_lattice_difference(descriptor, _window(window), target)))


@app.command()
def version() -> None:
    typer.echo(__version__)


def main() -> None:
    app()
