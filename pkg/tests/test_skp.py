import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_xy
from valsg import skp
from valsg.poly import MPoly, parse_poly

XY = ("x", "y")
poly_strategy = st.builds(
    lambda seed, deg, n: random_xy(random.Random(seed), deg, n),
    st.integers(0, 10 ** 6), st.integers(0, 10), st.integers(1, 4))


def test_first_key_polynomials():
    assert skp.key_polynomial(0) == parse_poly("x", XY)
    assert skp.key_polynomial(1) == parse_poly("y", XY)
    for i in range(2, 6):
        p = skp.key_polynomial
        assert p(i) == p(i - 1) ** 2 - parse_poly(f"x^{2 ** i}", XY) * p(i - 2)


def test_values_of_generators():
    assert skp.nu_bar(parse_poly("x", XY)) == 1
    assert skp.nu_bar(parse_poly("y", XY)) == Fraction(5, 2)
    assert skp.nu_bar(parse_poly("y^2 - x^5", XY)) == Fraction(21, 4)
    assert skp.nu_bar(parse_poly("y^2 - x^4", XY)) == 4


@settings(max_examples=60)
@given(poly_strategy, poly_strategy)
def test_ultrametric_inequality(f, g):
    s = f + g
    if s.is_zero():
        return
    vf, vg = skp.nu_bar(f), skp.nu_bar(g)
    assert skp.nu_bar(s) >= min(vf, vg)
    if vf != vg:
        assert skp.nu_bar(s) == min(vf, vg)


@settings(max_examples=60)
@given(poly_strategy, poly_strategy)
def test_value_is_multiplicative(f, g):
    assert skp.nu_bar(f * g) == skp.nu_bar(f) + skp.nu_bar(g)


@settings(max_examples=60)
@given(poly_strategy)
def test_expansion_reconstructs_and_values_are_distinct(f):
    exp = skp.standard_expansion(f)
    assert exp.reconstruct() == f
    vals = exp.values()
    assert len(vals) == len(set(vals))
    assert min(vals) == skp.nu_bar(f)


@given(st.integers(-20, 40), st.integers(0, 2 ** 10 - 1))
def test_decode_inverts_monomial_value(l0, mask):
    assert skp.decode_value(skp.monomial_value(l0, mask)) == (l0, mask)


def test_standard_injectivity_exhaustive():
    assert skp.check_standard_injectivity(8, 16) == 2 ** 8 * 17


@settings(max_examples=40)
@given(poly_strategy, poly_strategy)
def test_skp_algebra_matches_polynomial_product(f, g):
    a, b = skp.SKPElem.from_poly(f), skp.SKPElem.from_poly(g)
    prod = a * b
    assert prod.to_poly() == f * g
    assert prod.nu() == a.nu() + b.nu()
    assert prod.graded_image().t_valuation() == prod.nu()


def test_capped_product_keeps_low_terms():
    f = skp.SKPElem.from_poly(parse_poly("x + y + y^2 - x^3", XY))
    full = f * f
    capped = f.mul(f, cap=Fraction(5))
    assert capped.precision == 5
    assert capped.terms == {k: c for k, c in full.terms.items() if skp.monomial_value(*k) < 5}


def test_zero_has_no_value():
    with pytest.raises(skp.UndefinedValueError):
        skp.nu_bar(MPoly.zero(XY))


def test_divisibility_report_for_small_index():
    rep = skp.key_divisibility_check(3)
    assert rep.verdict and rep.index == 3


def test_module_tables():
    m = skp.module_Mn(2, 4)
    assert m.elements == skp.module_Mn_bruteforce(2, 4)
    assert skp.module_Mn(0, 3).elements == [0, 1, 2, Fraction(5, 2)]


def test_witness_certificate_text():
    w = skp.new_generator_witness(1, 3)[-1]
    assert w.j == 3 and w.value == skp.dyadic_beta(3) - 1
    assert w.denominator == 8
