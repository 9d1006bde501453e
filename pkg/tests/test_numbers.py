from __future__ import annotations

from fractions import Fraction

import pytest
from mpmath import iv

from app.core.errors import FileFormatError, PrecisionExhaustedError, UnsupportedCoordinateError
from app.geometry.numbers import (
    ExactNumber,
    SymbolicBasis,
    format_rational,
    is_rational,
    normalize,
    parse_rational,
    register_label,
    sign,
    to_float,
)


def test_parse_rational_accepts_fraction_strings_and_ints() -> None:
    assert parse_rational("3/6") == Fraction(1, 2)
    assert parse_rational("-4") == Fraction(-4)
    assert parse_rational(7) == Fraction(7)


@pytest.mark.parametrize("text", ["1/0", "pi", "1.5", ""])
def test_parse_rational_rejects_malformed_text(text: str) -> None:
    with pytest.raises(FileFormatError):
        parse_rational(text)


def test_format_rational_is_reduced() -> None:
    assert format_rational(Fraction(4, 6)) == "2/3"
    assert format_rational(5) == "5/1"


def test_basis_always_starts_with_unit_and_sorts_labels() -> None:
    basis = SymbolicBasis.of(["pi", "e", "pi"])
    assert basis.names == ("1", "e", "pi")
    assert SymbolicBasis.of(["e", "pi"]) is basis


def test_unknown_label_is_rejected() -> None:
    with pytest.raises(UnsupportedCoordinateError):
        ExactNumber.label("zeta3")


def test_linear_arithmetic_stays_exact() -> None:
    pi = ExactNumber.label("pi")
    value = (pi * 2 + 1) - pi - pi
    assert normalize(value) == Fraction(1)
    assert is_rational(value)
    assert (pi / 2).coefficient("pi") == Fraction(1, 2)


def test_product_of_symbols_leaves_the_span() -> None:
    with pytest.raises(UnsupportedCoordinateError):
        ExactNumber.label("pi") * ExactNumber.label("e")


def test_signs_of_transcendental_combinations() -> None:
    pi, e = ExactNumber.label("pi"), ExactNumber.label("e")
    assert sign(pi - 3) == 1
    assert sign(e - pi) == -1
    assert sign(pi - pi) == 0
    assert sign(ExactNumber.label("ln3") - ExactNumber.label("ln2")) == 1
    assert ExactNumber.label("sqrt2") < Fraction(3, 2)


def test_close_values_need_more_precision_than_the_cap() -> None:
    gap = ExactNumber.label("pi") - Fraction(355, 113)
    assert sign(gap) == -1
    with pytest.raises(PrecisionExhaustedError):
        sign(gap, cap_bits=16)


def test_mapping_round_trip_and_float() -> None:
    value = ExactNumber.from_mapping({"1": "1/2", "pi": "-1"})
    assert value.to_mapping() == {"1": Fraction(1, 2), "pi": Fraction(-1)}
    assert to_float(value) == pytest.approx(0.5 - 3.141592653589793)


def test_registered_label_is_decided_by_its_enclosure() -> None:
    register_label("phi", lambda: (1 + iv.sqrt(iv.mpf(5))) / 2)
    phi = ExactNumber.label("phi")
    assert sign(phi - Fraction(8, 5)) == 1
    assert sign(phi - Fraction(13, 8)) == -1
    with pytest.raises(UnsupportedCoordinateError):
        register_label("", lambda: iv.mpf(1))
