"""File formats and result records."""

from __future__ import annotations

from enum import Enum
from typing import Annotated, Any, Literal, Union

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, PlainSerializer, model_validator

from app.geometry.numbers import format_rational, parse_rational
from app.geometry.points import HalfSpace
from app.models.descriptors import (
    LatticeDifferenceDescriptor,
    PointValue,
    SetDescriptor,
    Window,
    dump_exact,
    parse_exact,
)

FORMAT_VERSION = 1


def parse_halfspace(value: Any) -> HalfSpace:
    if isinstance(value, HalfSpace):
        return value
    if not isinstance(value, dict) or "normal" not in value or "offset" not in value:
        raise ValueError("A half-space needs 'normal' and 'offset'")
    return HalfSpace((parse_rational(item) for item in value["normal"]), parse_exact(value["offset"]))


def dump_halfspace(halfspace: HalfSpace) -> dict[str, Any]:
    return {
        "normal": [format_rational(value) for value in halfspace.normal],
        "offset": dump_exact(halfspace.offset),
    }


HalfSpaceValue = Annotated[HalfSpace, BeforeValidator(parse_halfspace), PlainSerializer(dump_halfspace)]


class _Record(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)


class CertificateKind(str, Enum):
    VERTEX_POLYTOPE = "vertex-polytope"
    HOFFMAN = "hoffman"
    FACE_POLYTOPE = "face-polytope"


class VerdictStatus(str, Enum):
    VALID = "valid"
    INVALID = "invalid"
    UNDECIDED = "undecided"


class Verdict(_Record):
    status: VerdictStatus
    reason_code: str | None = None
    message: str | None = None
    offending_point: PointValue | None = None
    offending_index: int | None = None

    @classmethod
    def valid(cls, message: str | None = None) -> Verdict:
        return cls(status=VerdictStatus.VALID, message=message)

    @classmethod
    def invalid(cls, reason_code: str, message: str, **details: Any) -> Verdict:
        return cls(status=VerdictStatus.INVALID, reason_code=reason_code, message=message, **details)

    @classmethod
    def undecided(cls, reason_code: str, message: str) -> Verdict:
        return cls(status=VerdictStatus.UNDECIDED, reason_code=reason_code, message=message)

    @property
    def is_valid(self) -> bool:
        return self.status is VerdictStatus.VALID


class Configuration(_Record):
    descriptor: SetDescriptor
    kind: CertificateKind
    points: list[PointValue] = Field(default_factory=list)
    halfspaces: list[HalfSpaceValue] = Field(default_factory=list)


class LowerBoundCertificate(_Record):
    configuration: Configuration
    claimed_bound: int = Field(ge=1)
    verdict: Verdict


class CertificateMetadata(_Record):
    window: str | None = None
    nodes_explored: int | None = None
    elapsed_seconds: float | None = None
    exhausted: bool | None = None
    created_at: str | None = None


class CertificateFile(_Record):
    version: int = FORMAT_VERSION
    descriptor: SetDescriptor
    kind: CertificateKind
    points: list[PointValue] = Field(default_factory=list)
    halfspaces: list[HalfSpaceValue] = Field(default_factory=list)
    claimed_bound: int = Field(ge=1)
    metadata: CertificateMetadata = Field(default_factory=CertificateMetadata)

    @model_validator(mode="after")
    def validate_payload(self) -> CertificateFile:
        if self.kind is CertificateKind.FACE_POLYTOPE and not self.halfspaces:
            raise ValueError("Face-polytope certificates carry half-spaces")
        if self.kind is not CertificateKind.FACE_POLYTOPE and not self.points:
            raise ValueError(f"{self.kind.value} certificates carry points")
        return self

    @property
    def configuration(self) -> Configuration:
        return Configuration(
            descriptor=self.descriptor, kind=self.kind, points=self.points, halfspaces=self.halfspaces
        )


class RuleApplication(_Record):
    rule: str
    anchor: str
    value: int | None = None
    applies: bool = True
    note: str | None = None


class BoundReport(_Record):
    version: int = FORMAT_VERSION
    descriptor: SetDescriptor
    upper: int | None = None
    upper_rule: str | None = None
    upper_finite_unknown: bool = False
    lower: int | None = None
    lower_source: str | None = None
    rule_trace: list[RuleApplication] = Field(default_factory=list)


class RamseyProvenance(str, Enum):
    VERIFIED = "verified-exhaustively"
    LITERATURE = "literature"
    OVERRIDE = "override"


class RamseyEntry(_Record):
    k: int = Field(ge=1)
    value: int
    provenance: RamseyProvenance
    note: str | None = None


class ParityClass(_Record):
    parity: list[int]
    members: list[int]


class EdgeColor(_Record):
    first: int
    second: int
    midpoint: PointValue
    color: int | Literal["midpoint-in-S"]


class RamseyFinding(_Record):
    kind: Literal["clean", "midpoint-in-S", "monochromatic-triangle"]
    pair: list[int] | None = None
    triangle: list[int] | None = None
    color: int | None = None
    reconstruction: PointValue | None = None
    reconstruction_in_lattice: bool | None = None


class RamseyDiagnostic(_Record):
    parity_classes: list[ParityClass]
    edge_colors: list[EdgeColor]
    finding: RamseyFinding


class SearchOptions(_Record):
    window: Window
    max_size_hint: int | None = Field(default=None, ge=1)
    time_limit: float | None = Field(default=None, gt=0)
    workers: int = Field(default=1, ge=1)
    report_all_maxima: bool = False


class SearchSummary(_Record):
    nodes_explored: int
    elapsed_seconds: float
    exhausted: bool
    workers: int
    window: str
    best_size: int


class SearchResult(_Record):
    best: LowerBoundCertificate | None
    best_size: int
    nodes_explored: int
    exhausted: bool
    elapsed_seconds: float = 0.0
    all_maxima: list[list[PointValue]] = Field(default_factory=list)


class OracleReport(_Record):
    size: int
    vertex_oracle: int
    hoffman_oracle: int
    agree: bool


class Polytope(_Record):
    """Bounded intersection of rational half-spaces."""

    halfspaces: list[HalfSpaceValue] = Field(min_length=1)

    @property
    def dimension(self) -> int:
        return self.halfspaces[0].dimension

    def intersect(self, other: Polytope) -> Polytope:
        return Polytope(halfspaces=[*self.halfspaces, *other.halfspaces])


class MeetsSet(_Record):
    kind: Literal["meets_set"] = "meets_set"
    descriptor: SetDescriptor


class LatticeCount(_Record):
    kind: Literal["lattice_count"] = "lattice_count"
    count: int = Field(ge=1)


class DimensionAtLeast(_Record):
    kind: Literal["dimension"] = "dimension"
    minimum: int = Field(ge=0)


class LatticeDifferenceCount(_Record):
    kind: Literal["lattice_difference_count"] = "lattice_difference_count"
    descriptor: LatticeDifferenceDescriptor
    count: int = Field(ge=1)


PropertySpec = Annotated[
    Union[MeetsSet, LatticeCount, DimensionAtLeast, LatticeDifferenceCount],
    Field(discriminator="kind"),
]


class PropertyClassification(_Record):
    kind: str
    helly: bool
    monotone: bool
    orderable: bool | None
    evaluable: bool
    note: str


class ColoredInstance(_Record):
    version: int = FORMAT_VERSION
    colors: list[list[Polytope]] = Field(min_length=1)
    property: PropertySpec
    seed: int | None = None
    planted: bool = False

    @model_validator(mode="after")
    def validate_colors(self) -> ColoredInstance:
        if any(not family for family in self.colors):
            raise ValueError("Every color class needs at least one convex set")
        return self


class ColorfulOutcome(_Record):
    kind: Literal["hypothesis-fails", "conclusion-holds", "counterexample"]
    rainbow: list[int] | None = None
    color: int | None = None
    witness: PointValue | None = None
    count: int | None = None


class HellyConditionResult(_Record):
    consistent: bool
    witness: list[int] | None = None


class TrialRecord(_Record):
    seed: int
    planted: bool
    outcome: ColorfulOutcome


class TrialReport(_Record):
    version: int = FORMAT_VERSION
    trials: int
    hypothesis_held: int
    conclusion_held: int
    counterexamples: list[ColoredInstance] = Field(default_factory=list)
    records: list[TrialRecord] = Field(default_factory=list)

