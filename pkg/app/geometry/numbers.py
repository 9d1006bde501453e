"""Exact rationals, declared symbolic bases, and formal Q-linear combinations."""

from __future__ import annotations

import logging
import math
import re
import threading
from collections.abc import Callable, Iterable, Mapping
from fractions import Fraction
from typing import Any, Union

from mpmath import iv

from app.core.config import get_settings
from app.core.errors import FileFormatError, PrecisionExhaustedError, UnsupportedCoordinateError

logger = logging.getLogger(__name__)

Rational = Fraction
UNIT = "1"

_RATIONAL_PATTERN = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+))?\s*$")
_LN_PATTERN = re.compile(r"^ln(\d+)$")
_SQRT_PATTERN = re.compile(r"^sqrt(\d+)$")

# mpmath's interval context keeps its precision globally.
_IV_LOCK = threading.RLock()


def parse_rational(value: str | int | Fraction) -> Fraction:
    """Parse "p/q", "p" or an int into a reduced Fraction."""

    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise FileFormatError(f"Not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if not isinstance(value, str):
        raise FileFormatError(f"Not a rational: {value!r}")
    match = _RATIONAL_PATTERN.match(value)
    if not match:
        raise FileFormatError(f"Not a rational: {value!r}")
    numerator = int(match.group(1))
    denominator = int(match.group(2)) if match.group(2) is not None else 1
    if denominator == 0:
        raise FileFormatError(f"Zero denominator: {value!r}")
    return Fraction(numerator, denominator)


def format_rational(value: Fraction | int) -> str:
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def _constant_factory(label: str) -> Callable[[], Any] | None:
    fixed: dict[str, Callable[[], Any]] = {
        "pi": lambda: +iv.pi,
        "e": lambda: +iv.e,
        "euler": lambda: +iv.euler,
        "catalan": lambda: +iv.catalan,
    }
    if label in fixed:
        return fixed[label]
    ln_match = _LN_PATTERN.match(label)
    if ln_match and int(ln_match.group(1)) >= 2:
        argument = int(ln_match.group(1))
        return lambda: iv.ln(iv.mpf(argument))
    sqrt_match = _SQRT_PATTERN.match(label)
    if sqrt_match:
        argument = int(sqrt_match.group(1))
        if math.isqrt(argument) ** 2 != argument:
            return lambda: iv.sqrt(iv.mpf(argument))
    return None


class _EnclosureCache:
    """Per-label interval enclosures; entries are only ever replaced by tighter ones."""

    def __init__(self) -> None:
        self._entries: dict[str, tuple[int, Any]] = {}
        self._custom: dict[str, Callable[[], Any]] = {}

    def register(self, label: str, factory: Callable[[], Any]) -> None:
        with _IV_LOCK:
            self._custom[label] = factory
            self._entries.pop(label, None)

    def is_known(self, label: str) -> bool:
        return label in self._custom or _constant_factory(label) is not None

    def get(self, label: str, bits: int) -> Any:
        with _IV_LOCK:
            cached = self._entries.get(label)
            if cached is not None and cached[0] >= bits:
                return cached[1]
            factory = self._custom.get(label) or _constant_factory(label)
            if factory is None:
                raise UnsupportedCoordinateError(f"No enclosure known for label '{label}'")
            saved = iv.prec
            try:
                iv.prec = bits
                value = factory()
            finally:
                iv.prec = saved
            self._entries[label] = (bits, value)
            logger.debug("refined enclosure of %s to %d bits", label, bits)
            return value


_ENCLOSURES = _EnclosureCache()


def register_label(label: str, factory: Callable[[], Any]) -> None:
    """Declare an extra basis label with an mpmath interval factory evaluated at ``iv.prec``."""

    if label == UNIT or not label:
        raise UnsupportedCoordinateError(f"Invalid label '{label}'")
    _ENCLOSURES.register(label, factory)


def label_enclosure(label: str, bits: int) -> Any:
    return _ENCLOSURES.get(label, bits)


def interval_sign(
    evaluate: Callable[[int], Any],
    *,
    start_bits: int | None = None,
    cap_bits: int | None = None,
    what: str = "value",
) -> int:
    """Refine ``evaluate(bits)`` by doubling precision until the enclosure excludes zero."""

    settings = get_settings()
    bits = start_bits or settings.precision_start_bits
    cap = cap_bits or settings.precision_cap_bits
    while bits <= cap:
        with _IV_LOCK:
            saved = iv.prec
            try:
                iv.prec = bits
                enclosure = evaluate(bits)
                positive = (enclosure > 0) is True
                negative = (enclosure < 0) is True
            finally:
                iv.prec = saved
        if positive:
            return 1
        if negative:
            return -1
        bits *= 2
    raise PrecisionExhaustedError(f"Sign of {what} undecided at {cap} bits")


class SymbolicBasis:
    """Declared Q-linearly independent basis; element 0 is always the unit."""

    __slots__ = ("names", "_index")

    _interned: dict[tuple[str, ...], SymbolicBasis] = {}
    _lock = threading.Lock()

    def __init__(self, names: Iterable[str]) -> None:
        names = tuple(names)
        if not names or names[0] != UNIT:
            raise UnsupportedCoordinateError("Basis must start with the unit '1'")
        if len(set(names)) != len(names):
            raise UnsupportedCoordinateError(f"Duplicate basis labels: {names}")
        for label in names[1:]:
            if not _ENCLOSURES.is_known(label):
                raise UnsupportedCoordinateError(f"No enclosure known for label '{label}'")
        self.names = names
        self._index = {name: position for position, name in enumerate(names)}

    @classmethod
    def of(cls, labels: Iterable[str]) -> SymbolicBasis:
        key = (UNIT, *sorted({label for label in labels if label != UNIT}))
        with cls._lock:
            basis = cls._interned.get(key)
            if basis is None:
                basis = cls(key)
                cls._interned[key] = basis
            return basis

    @classmethod
    def trivial(cls) -> SymbolicBasis:
        return cls.of(())

    @property
    def labels(self) -> tuple[str, ...]:
        return self.names[1:]

    def index(self, label: str) -> int:
        return self._index[label]

    def union(self, other: SymbolicBasis) -> SymbolicBasis:
        if other is self:
            return self
        return SymbolicBasis.of((*self.labels, *other.labels))

    def enclosure(self, label: str, bits: int) -> Any:
        return label_enclosure(label, bits)

    def __repr__(self) -> str:
        return f"SymbolicBasis({list(self.names)!r})"


class ExactNumber:
    """A rational or a formal Q-linear combination over a declared basis."""

    __slots__ = ("basis", "coefficients", "_hash")

    def __init__(self, basis: SymbolicBasis, coefficients: Iterable[Fraction | int]) -> None:
        coefficients = tuple(Fraction(value) for value in coefficients)
        if len(coefficients) != len(basis.names):
            raise UnsupportedCoordinateError("Coefficient vector does not match basis")
        self.basis = basis
        self.coefficients = coefficients
        self._hash: int | None = None

    @classmethod
    def from_rational(cls, value: Fraction | int) -> ExactNumber:
        return cls(SymbolicBasis.trivial(), (Fraction(value),))

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, Fraction | int | str]) -> ExactNumber:
        parsed = {label: parse_rational(value) for label, value in mapping.items()}
        basis = SymbolicBasis.of(label for label, value in parsed.items() if value != 0)
        return cls(basis, (parsed.get(name, Fraction(0)) for name in basis.names))

    @classmethod
    def label(cls, label: str, coefficient: Fraction | int = 1) -> ExactNumber:
        return cls.from_mapping({label: Fraction(coefficient)})

    def to_mapping(self) -> dict[str, Fraction]:
        return {
            name: value
            for name, value in zip(self.basis.names, self.coefficients)
            if value != 0 or name == UNIT
        }

    @property
    def rational_part(self) -> Fraction:
        return self.coefficients[0]

    @property
    def is_rational(self) -> bool:
        return all(value == 0 for value in self.coefficients[1:])

    @property
    def is_zero(self) -> bool:
        return all(value == 0 for value in self.coefficients)

    def coefficient(self, label: str) -> Fraction:
        if label not in self.basis.names:
            return Fraction(0)
        return self.coefficients[self.basis.index(label)]

    def as_fraction(self) -> Fraction:
        if not self.is_rational:
            raise UnsupportedCoordinateError(f"{self} is not rational")
        return self.coefficients[0]

    def over(self, basis: SymbolicBasis) -> ExactNumber:
        if basis is self.basis:
            return self
        values = {name: value for name, value in zip(self.basis.names, self.coefficients)}
        for name, value in values.items():
            if value != 0 and name not in basis.names:
                raise UnsupportedCoordinateError(f"Label '{name}' missing from target basis")
        return ExactNumber(basis, (values.get(name, Fraction(0)) for name in basis.names))

    def _aligned(self, other: Scalar) -> tuple[ExactNumber, ExactNumber]:
        other = as_exact(other)
        basis = self.basis.union(other.basis)
        return self.over(basis), other.over(basis)

    def __add__(self, other: Scalar) -> ExactNumber:
        left, right = self._aligned(other)
        return ExactNumber(left.basis, (a + b for a, b in zip(left.coefficients, right.coefficients)))

    __radd__ = __add__

    def __sub__(self, other: Scalar) -> ExactNumber:
        left, right = self._aligned(other)
        return ExactNumber(left.basis, (a - b for a, b in zip(left.coefficients, right.coefficients)))

    def __rsub__(self, other: Scalar) -> ExactNumber:
        return as_exact(other) - self

    def __neg__(self) -> ExactNumber:
        return ExactNumber(self.basis, (-value for value in self.coefficients))

    def __mul__(self, other: Scalar) -> ExactNumber:
        if isinstance(other, ExactNumber):
            if other.is_rational:
                other = other.rational_part
            elif self.is_rational:
                return other * self.rational_part
            else:
                raise UnsupportedCoordinateError("Product of two symbolic numbers leaves the Q-span")
        factor = Fraction(other)
        return ExactNumber(self.basis, (value * factor for value in self.coefficients))

    __rmul__ = __mul__

    def __truediv__(self, other: Scalar) -> ExactNumber:
        if isinstance(other, ExactNumber):
            other = other.as_fraction()
        divisor = Fraction(other)
        if divisor == 0:
            raise ZeroDivisionError("ExactNumber division by zero")
        return ExactNumber(self.basis, (value / divisor for value in self.coefficients))

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            return self.is_rational and self.coefficients[0] == other
        if not isinstance(other, ExactNumber):
            return NotImplemented
        return self.to_mapping() == other.to_mapping()

    def __hash__(self) -> int:
        if self._hash is None:
            if self.is_rational:
                self._hash = hash(self.coefficients[0])
            else:
                self._hash = hash(frozenset(self.to_mapping().items()))
        return self._hash

    def __lt__(self, other: Scalar) -> bool:
        return sign(self - other) < 0

    def __le__(self, other: Scalar) -> bool:
        return sign(self - other) <= 0

    def __gt__(self, other: Scalar) -> bool:
        return sign(self - other) > 0

    def __ge__(self, other: Scalar) -> bool:
        return sign(self - other) >= 0

    def interval(self, bits: int) -> Any:
        """Interval enclosure at ``bits``; must be called with the interval lock held."""

        total = interval_rational(self.coefficients[0])
        for name, value in zip(self.basis.labels, self.coefficients[1:]):
            if value != 0:
                total = total + interval_rational(value) * self.basis.enclosure(name, bits)
        return total

    def __repr__(self) -> str:
        return f"ExactNumber({format_exact(self)})"

    def __str__(self) -> str:
        return format_exact(self)


Scalar = Union[Fraction, ExactNumber]


def interval_rational(value: Fraction) -> Any:
    return iv.mpf(value.numerator) / iv.mpf(value.denominator)


def as_exact(value: Scalar | int) -> ExactNumber:
    if isinstance(value, ExactNumber):
        return value
    return ExactNumber.from_rational(Fraction(value))


def normalize(value: Scalar | int) -> Scalar:
    """Collapse rational ExactNumbers to Fraction; symbolic values stay ExactNumber."""

    if isinstance(value, ExactNumber):
        return value.rational_part if value.is_rational else value
    return Fraction(value)


def is_rational(value: Scalar) -> bool:
    return not isinstance(value, ExactNumber) or value.is_rational


def sign(value: Scalar | int, *, cap_bits: int | None = None) -> int:
    """Sign of an exact number: symbolic zero test first, interval refinement for strict signs."""

    if not isinstance(value, ExactNumber):
        value = Fraction(value)
        return (value > 0) - (value < 0)
    if value.is_zero:
        return 0
    if value.is_rational:
        rational = value.rational_part
        return (rational > 0) - (rational < 0)
    return interval_sign(value.interval, cap_bits=cap_bits, what=format_exact(value))


def format_exact(value: Scalar) -> str:
    if not isinstance(value, ExactNumber):
        return format_rational(value)
    parts = [f"{format_rational(coefficient)}*{label}" for label, coefficient in value.to_mapping().items()]
    return " + ".join(parts)


def to_float(value: Scalar) -> float:
    """Approximate value for plotting and logs."""

    if not isinstance(value, ExactNumber):
        return float(value)
    if value.is_rational:
        return float(value.rational_part)
    with _IV_LOCK:
        saved = iv.prec
        try:
            iv.prec = 64
            enclosure = value.interval(64)
            return float(enclosure.mid)
        finally:
            iv.prec = saved
