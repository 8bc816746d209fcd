import random
from fractions import Fraction

from hypothesis import assume, given, settings, strategies as st

from conftest import random_xy
from valsg import composite
from valsg.order import ALPHA, GroupElem, QuadRat
from valsg.poly import MPoly, parse_poly

V = composite.XYUV
lexpos = st.tuples(st.integers(0, 9), st.integers(-9, 9)).filter(lambda v: v[0] > 0 or (v[0] == 0 and v[1] > 0))


def _in_cone_by_solving(g, rays):
    """2D oracle: ``g`` lies in the cone iff it is a nonnegative combination of some pair of rays."""
    for i, a in enumerate(rays):
        for b in rays[i:]:
            det = a[0] * b[1] - a[1] * b[0]
            if det == 0:
                # parallel rays: g must be a nonnegative multiple of a
                if a[0] * g[1] - a[1] * g[0] == 0 and a[0] * g[0] + a[1] * g[1] >= 0:
                    return True
                continue
            s = Fraction(g[0] * b[1] - g[1] * b[0], det)
            t = Fraction(a[0] * g[1] - a[1] * g[0], det)
            if s >= 0 and t >= 0:
                return True
    return False


@given(lexpos, st.lists(lexpos, min_size=1, max_size=5))
def test_cone_check_against_pairwise_solver(g, prior):
    res = composite.cone_check(g, prior)
    assert res.inside == _in_cone_by_solving(g, prior)
    if not res.inside:
        assert all(composite._evaluate_functional(res.certificate, p) >= 0 for p in prior)
        assert composite._evaluate_functional(res.certificate, g) < 0


def test_gamma_closed_form():
    assert composite.z2_gamma(1) == GroupElem((0, 1))
    assert composite.z2_gamma(2) == GroupElem((1, 0))
    assert composite.z2_gamma(3) == GroupElem((3, -8))
    assert composite.z2_gamma(4) == GroupElem((4, -8))


def test_default_rules_put_gamma4_in_prefix():
    ex = composite.z2_build(depth=5)
    ix4 = next(ix for ix in ex.indices if ix.i == 4)
    assert ix4.gamma == composite.z2_gamma(2) * 4 + composite.z2_gamma(3) - composite.z2_gamma(2) * 3
    assert not ix4.outside_cone


def test_cubic_rule_is_outside_every_prefix_cone():
    ex = composite.z2_build("3^i", "i", "1", depth=10)
    for ix in ex.indices:
        assert ix.matches_closed_form
        assert ix.outside_cone
        assert ix.multiples_in_prefix == []


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_value_agrees_with_series_evaluation(seed):
    rng = random.Random(seed)
    f = composite._lift(composite._random_xy(rng, 3, 2)) * MPoly.var(V, "u")
    f = f + composite._lift(composite._random_xy(rng, 3, 2)) * MPoly.var(V, "v") ** 2
    f = f + composite._lift(composite._random_xy(rng, 3, 2))
    assume(not f.is_zero())
    assert composite.composite_value(f) == composite.composite_value_by_series(f)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(0, 10 ** 6))
def test_composite_value_is_multiplicative(s1, s2):
    f = random_xy(random.Random(s1), 4, 2).with_variables(V) * MPoly.var(V, "u") + MPoly.var(V, "v")
    g = random_xy(random.Random(s2), 4, 3).with_variables(V)
    cv = composite.composite_value
    assert cv(f * g) == cv(f) + cv(g)


def test_composite_exponent_and_values():
    # u^(k-j) v^j has t-exponent (k-j) + j*alpha
    assert composite.composite_exponent(1, 1) == ALPHA
    assert composite.composite_exponent(1, 3) == QuadRat(2) + ALPHA
    w = parse_poly("x*v - y*u", V)
    assert composite.composite_value(w * w) == composite.composite_value(w) * 2


def test_slice_and_phi():
    assert composite.F_slice("1*alpha").contained
    for k in (1, 2):
        assert composite.phi_derivative_check(k, composite.random_phi_coeffs(k, seed=5))
    assert composite.parse_level("2") == (2, False)
    assert composite.parse_level("3*alpha") == (3, True)
