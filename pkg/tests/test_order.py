from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from valsg.order import (
    ALPHA, QUAD, RAT, GroupElem, QuadRat, SignatureError, decode_value, encode_value,
    parse_rat, q_subgroup, subgroup_index, two_adic_exponent,
)

rats = st.fractions(max_denominator=50).filter(lambda q: abs(q) < 1000)
quads = st.builds(QuadRat, rats, rats)


@given(quads, quads)
def test_quadrat_order_matches_floats_when_far_apart(a, b):
    fa, fb = float(a), float(b)
    if abs(fa - fb) > 1e-6:
        assert (a < b) == (fa < fb)


@given(quads, quads, quads)
def test_quadrat_field_laws(a, b, c):
    assert (a + b) * c == a * c + b * c
    assert a - a == QuadRat(0)
    if b:
        assert (a / b) * b == a


@given(quads)
def test_quadrat_sign_is_exact(a):
    assert a.sign() == (0 if a == QuadRat(0) else (1 if QuadRat(0) < a else -1))


def test_alpha_squares_to_two():
    assert ALPHA * ALPHA == QuadRat(2)
    assert QuadRat(1) < ALPHA < QuadRat(Fraction(3, 2))


@given(st.lists(rats, min_size=2, max_size=2), st.lists(rats, min_size=2, max_size=2))
def test_lex_order_is_total_and_translation_invariant(a, b):
    x, y = GroupElem(a), GroupElem(b)
    z = GroupElem([Fraction(1), Fraction(-3)])
    assert (x < y) + (y < x) + (x == y) == 1
    assert (x < y) == (x + z < y + z)


def test_signature_mismatch_is_rejected():
    with pytest.raises(SignatureError):
        GroupElem((QuadRat(1), 0), (QUAD, RAT)) + GroupElem((1, 0), (RAT, RAT))


@given(quads, rats)
def test_value_json_round_trip(a, q):
    g = GroupElem((a, q), (QUAD, RAT))
    assert decode_value(encode_value(g)) == g
    assert decode_value(encode_value(q)) == q


def test_parse_and_two_adic():
    assert parse_rat("-3/4") == Fraction(-3, 4)
    assert two_adic_exponent(Fraction(5, 8)) == 3
    assert two_adic_exponent(12) == 0


def test_subgroup_index():
    small = q_subgroup([Fraction(1, 2)])
    big = q_subgroup([Fraction(1, 8), Fraction(3, 4)])
    assert small <= big
    assert subgroup_index(small, big) == 4
    assert Fraction(3, 2) in small and Fraction(1, 4) not in small
