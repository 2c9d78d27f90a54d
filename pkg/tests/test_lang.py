import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from fpsinv import (
    QQ,
    CompositionDomainError,
    FieldSpec,
    NonInvertibleDenominatorError,
    ParseError,
    UnsupportedFieldError,
    expand_elementary,
    format_series,
    identity_map,
    map_from_json,
    map_to_json,
    map_to_text,
    parse_map,
    parse_sections,
    parse_source,
)
from fpsinv.errors import InvalidParameterError
from corpus import TWO_VAR, SIN, random_normal_map
from golden import CATALAN_P2, TWO_VAR_F1, TWO_VAR_F2
from oracles import from_udict, to_dict, to_udict

F5 = FieldSpec.prime(5)
F7 = FieldSpec.prime(7)


def test_two_variable_example_expansion():
    F = parse_map(TWO_VAR, QQ, 9)
    assert to_dict(F[0]) == TWO_VAR_F1
    assert to_dict(F[1]) == TWO_VAR_F2
    assert F[1].coeff((2, 2)) == Fraction(-1, 2)
    assert F[1].coeff((4, 4)) == Fraction(1, 24)


def test_single_definition_in_y():
    src = parse_source("vars: Y\nF1 = Y + Y^2")
    assert src.variables == ["Y"]
    assert parse_map("vars: Y\nF1 = Y + Y^2", QQ, 6) == parse_map("F1 = X + X^2", QQ, 6)
    # without a header the single identifier used names the variable
    assert parse_source("F1 = Y + Y^2").variables == ["Y"]


@pytest.mark.parametrize("spec", [QQ, F5, F7])
def test_identity_in_any_field(spec):
    assert parse_map("F1 = X", spec, 4) == identity_map(1, 4, spec)


@pytest.mark.parametrize(
    "name, degree, expected",
    [
        ("sin", 7, {1: 1, 3: Fraction(-1, 6), 5: Fraction(1, 120), 7: Fraction(-1, 5040)}),
        ("cos", 4, {0: 1, 2: Fraction(-1, 2), 4: Fraction(1, 24)}),
        ("exp", 2, {0: 1, 1: 1, 2: Fraction(1, 2)}),
        ("log1p", 4, {1: 1, 2: Fraction(-1, 2), 3: Fraction(1, 3), 4: Fraction(-1, 4)}),
    ],
)
def test_expand_elementary(name, degree, expected):
    assert to_udict(expand_elementary(name, degree, QQ)) == expected


def test_expand_elementary_errors():
    with pytest.raises(UnsupportedFieldError):
        expand_elementary("sin", 5, F7)
    with pytest.raises(InvalidParameterError):
        expand_elementary("tan", 5, QQ)


def test_format_examples():
    assert format_series(parse_map("F1 = X + X^2", QQ, 2)[0]) == "X + X^2 + O(X)^3"
    assert format_series(from_udict(CATALAN_P2, 6)) == "2*X^3 - 11*X^4 + 52*X^5 - 238*X^6 + O(X)^7"
    zero = parse_map("F1 = X - X", QQ, 4)[0]
    assert format_series(zero) == "0 + O(X)^5"
    two = parse_map("vars: X, Y\nF1 = -1/2*X^2*Y + 3\nF2 = Y", QQ, 3)[0]
    assert format_series(two) == "3 - 1/2*X^2*Y + O(X, Y)^4"
    assert format_series(parse_map("F1 = -X", F7, 2)[0]) == "6*X + O(X)^3"


def test_grammar_features():
    m = parse_map(
        "# comment\r\nvars: X, Y  # trailing\r\nF2 = Y\r\nF1 = -(X - 2*Y)^2 * 3/4 + X\r\n", QQ, 3
    )
    assert to_dict(m[0]) == {(1, 0): 1, (2, 0): Fraction(-3, 4), (1, 1): 3, (0, 2): -3}
    assert to_dict(m[1]) == {(0, 1): 1}
    assert parse_map("F1 = X^0 - 1 + X", QQ, 2) == identity_map(1, 2, QQ)


def test_division_in_prime_field():
    assert to_dict(parse_map("F1 = X + 1/2*X^2", F7, 3)[0]) == {(1,): 1, (2,): 4}
    with pytest.raises(NonInvertibleDenominatorError):
        parse_map("F1 = X + 1/7*X^2", F7, 3)


CORPUS = {
    "catalan": "F1 = Y + Y^2\n",
    "sin": SIN,
    "two-variable": TWO_VAR,
}


@pytest.mark.parametrize("name", sorted(CORPUS))
def test_corpus_parses(name):
    src = parse_source(CORPUS[name])
    assert len(src.definitions) == len(src.variables)


MUTANTS = [
    ("unbalanced", "vars: X, Y\nF1 = sin(X+Y - Y\nF2 = cos(X*Y) - 1 + Y\n", 2, 17),
    ("unbalanced-close", "F1 = X + Y^2)\n", 1, 13),
    ("unknown-function", "vars: X, Y\nF1 = sin(X+Y) - Y\nF2 = cosh(X*Y) - 1 + Y\n", 3, 6),
    ("negative-exponent", "F1 = X + X^-2\n", 1, 12),
    ("unknown-identifier", "vars: X, Y\nF1 = X + Z\nF2 = Y\n", 2, 10),
    ("missing-component", "vars: X, Y\nF1 = X\n", None, None),
    ("duplicate-component", "vars: X, Y\nF1 = X\nF1 = Y\nF2 = Y\n", 3, 1),
    ("zero-denominator", "F1 = X + 1/0*X^2\n", 1, 12),
    ("implicit-product", "vars: X, Y\nF1 = X + XY\nF2 = Y\n", 2, 10),
    ("dangling-operator", "F1 = X +\n", 1, 9),
]


@pytest.mark.parametrize("name, text, line, column", MUTANTS, ids=[m[0] for m in MUTANTS])
def test_mutants_rejected_with_location(name, text, line, column):
    with pytest.raises(ParseError) as info:
        parse_map(text, QQ, 5)
    if line is not None:
        assert (info.value.line, info.value.column) == (line, column)
        assert f"line {line}, column {column}" in str(info.value)


def test_elementary_call_errors():
    with pytest.raises(UnsupportedFieldError):
        parse_map(SIN, F7, 5)
    with pytest.raises(CompositionDomainError):
        parse_map("F1 = X + sin(1 + X)", QQ, 5)


def test_several_identifiers_need_header():
    with pytest.raises(ParseError):
        parse_source("F1 = X + Y")
    with pytest.raises(ParseError):
        parse_source("F1 = X\nF2 = X")


def test_sections():
    text = "vars: X\nmap F:\nF1 = X - X^2\nmap G:\nF1 = X + X^2\n"
    sec = parse_sections(text)
    assert sorted(sec) == ["F", "G"]
    assert parse_map(sec["G"], QQ, 3) == parse_map("F1 = X + X^2", QQ, 3)
    with pytest.raises(ParseError):
        parse_sections("F1 = X")


seeds = st.tuples(st.integers(0, 10**6), st.integers(1, 3), st.integers(2, 7), st.sampled_from([QQ, F7]))


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_text_roundtrip(params):
    seed, n, d, spec = params
    m = random_normal_map(random.Random(seed), n, d, spec)
    text = map_to_text(m)
    assert parse_map(text, spec, d) == m


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_json_roundtrip(params):
    seed, n, d, spec = params
    m = random_normal_map(random.Random(seed), n, d, spec)
    assert map_from_json(map_to_json(m), n, d, spec) == m
