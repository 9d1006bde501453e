"""Arithmetic contexts used by the exact linear algebra and LP code.

Rational data runs on plain Fractions. Data carrying symbolic labels is promoted
to the rational function field over its labels, where products and quotients
stay exact; signs of field elements come from interval evaluation of numerator
and denominator at the label enclosures.
"""

from __future__ import annotations

from collections.abc import Iterable
from fractions import Fraction
from functools import lru_cache
from typing import Any

from sympy import QQ, Symbol
from sympy.polys.fields import FracField

from app.core.errors import UnsupportedCoordinateError
from app.geometry.numbers import (
    ExactNumber,
    Scalar,
    SymbolicBasis,
    interval_rational,
    interval_sign,
    normalize,
)


class RationalContext:
    """Plain Fraction arithmetic."""

    zero = Fraction(0)
    one = Fraction(1)
    symbolic = False

    def coerce(self, value: Scalar | int) -> Fraction:
        if isinstance(value, ExactNumber):
            return value.as_fraction()
        return Fraction(value)

    def sign(self, value: Fraction) -> int:
        return (value > 0) - (value < 0)

    def is_zero(self, value: Fraction) -> bool:
        return value == 0

    def demote(self, value: Fraction) -> Scalar:
        return value


class FieldContext:
    """Rational functions over the labels of a symbolic basis."""

    symbolic = True

    def __init__(self, basis: SymbolicBasis) -> None:
        self.basis = basis
        self.field = FracField([Symbol(label) for label in basis.labels], QQ)
        self.gens = dict(zip(basis.labels, self.field.gens))
        self.zero = self.field.zero
        self.one = self.field.one

    def _ground(self, value: Fraction) -> Any:
        return self.field.ground_new(QQ(value.numerator, value.denominator))

    def coerce(self, value: Any) -> Any:
        if isinstance(value, ExactNumber):
            result = self._ground(value.rational_part)
            for label, coefficient in zip(value.basis.labels, value.coefficients[1:]):
                if coefficient != 0:
                    if label not in self.gens:
                        raise UnsupportedCoordinateError(f"Label '{label}' outside the working basis")
                    result = result + self._ground(coefficient) * self.gens[label]
            return result
        if isinstance(value, (int, Fraction)):
            return self._ground(Fraction(value))
        if getattr(value, "field", None) == self.field:
            return value
        raise UnsupportedCoordinateError(f"Cannot coerce {value!r} into the working field")

    def is_zero(self, value: Any) -> bool:
        return not value

    def _polynomial_sign(self, poly: Any) -> int:
        if poly.is_ground:
            constant = _coefficient(poly.LC) if poly else Fraction(0)
            return (constant > 0) - (constant < 0)
        labels = self.basis.labels
        terms = [(monomial, _coefficient(coefficient)) for monomial, coefficient in poly.items()]

        def evaluate(bits: int) -> Any:
            enclosures = [self.basis.enclosure(label, bits) for label in labels]
            total = interval_rational(Fraction(0))
            for monomial, coefficient in terms:
                term = interval_rational(coefficient)
                for enclosure, power in zip(enclosures, monomial):
                    if power:
                        term = term * enclosure**power
                total = total + term
            return total

        return interval_sign(evaluate, what=str(poly.as_expr()))

    def sign(self, value: Any) -> int:
        if not value:
            return 0
        return self._polynomial_sign(value.numer) * self._polynomial_sign(value.denom)

    def demote(self, value: Any) -> Scalar:
        """Return the value as a Fraction or ExactNumber when it is Q-linear in the labels."""

        if not value:
            return Fraction(0)
        if not value.denom.is_ground:
            raise UnsupportedCoordinateError("Result is not Q-linear in the basis labels")
        scale = _coefficient(value.denom.LC)
        mapping: dict[str, Fraction] = {}
        for monomial, coefficient in value.numer.items():
            degree = sum(monomial)
            if degree == 0:
                mapping["1"] = _coefficient(coefficient) / scale
            elif degree == 1:
                label = self.basis.labels[monomial.index(1)]
                mapping[label] = _coefficient(coefficient) / scale
            else:
                raise UnsupportedCoordinateError("Result is not Q-linear in the basis labels")
        return normalize(ExactNumber.from_mapping(mapping))


def _coefficient(value: Any) -> Fraction:
    return Fraction(int(value.numerator), int(value.denominator))


RATIONAL = RationalContext()


@lru_cache(maxsize=64)
def _field_context(basis: SymbolicBasis) -> FieldContext:
    return FieldContext(basis)


def context_for(values: Iterable[Scalar]) -> RationalContext | FieldContext:
    """Pick the cheapest context able to hold every value."""

    labels: set[str] = set()
    for value in values:
        if isinstance(value, ExactNumber) and not value.is_rational:
            labels.update(label for label in value.basis.labels if value.coefficient(label) != 0)
    if not labels:
        return RATIONAL
    return _field_context(SymbolicBasis.of(labels))
