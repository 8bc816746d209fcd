import json
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from valsg import skp, transcend
from valsg.hahn import HahnSeries
from valsg.skp import SKPElem


@pytest.fixture(scope="module")
def state4():
    return transcend.transcend_build(4)


def test_first_step_is_fixed(state4):
    s = state4.steps[0]
    assert s.tau == Fraction(5, 2)
    assert s.lam == Fraction(15, 4) == s.alpha
    assert s.f == skp.decode_value(Fraction(15, 4) + s.g)
    assert s.certificate_kind == "exact"


def test_taus_and_monotone_lambdas(state4):
    assert [s.tau for s in state4.steps] == [Fraction(5, 2), Fraction(15, 2), Fraction(45, 4), Fraction(15)]
    lams = [s.lam for s in state4.steps]
    assert lams == sorted(lams) and len(set(lams)) == 4
    assert state4.check_invariants() == []


def test_h_has_value_alpha(state4):
    for s in state4.steps:
        assert s.h.nu() == s.alpha


def test_differences_have_expected_values(state4):
    diffs = transcend.difference_values(state4)
    assert len(diffs) == 4 * 5 // 2
    for (i, j), v in diffs.items():
        assert v == state4.steps[i].alpha
        direct = (state4.z_at(j) - state4.z_at(i)).nu()
        assert direct == v


@given(st.fractions(min_value=-20, max_value=60, max_denominator=2 ** 12).filter(lambda q: (q.denominator & (q.denominator - 1)) == 0))
def test_realize_value_hits_target(target):
    l0, mask, m = transcend.realize_value(target)
    assert skp.monomial_value(l0, mask) - m == target
    assert l0 >= 0 and m >= 0


def test_realize_value_rejects_non_dyadic_and_horizon():
    with pytest.raises(transcend.HorizonError):
        transcend.realize_value(Fraction(1, 3))
    with pytest.raises(transcend.HorizonError):
        transcend.realize_value(skp.dyadic_beta(12), horizon=8)


def test_realized_polys_values():
    f, g = transcend.realized_polys(*transcend.realize_value(Fraction(137, 16)))
    assert skp.nu_bar(f) - skp.nu_bar(g) == Fraction(137, 16)


def test_d_basis_size():
    for n in range(5):
        assert len(transcend.d_basis(n)) == (n + 1) * (n + 2) * (n + 3) // 6


def test_spectrum_of_first_degree_at_zero():
    rep = transcend.d_spectrum(1, SKPElem())
    # x, y and 1; z maps to zero
    assert rep.values == [0, 1, Fraction(5, 2)]


def test_value_spectrum_dimension_oracle():
    rng = random.Random(3)
    gens = []
    for _ in range(6):
        gens.append(HahnSeries({Fraction(rng.randint(0, 6)): rng.randint(1, 3) for _ in range(3)}))
    gens.append(gens[0] + gens[1])
    rep = transcend.value_spectrum(gens)
    assert rep.dimension <= 6
    assert rep.dimension == len(rep.echelon_basis)


def test_spotcheck_small():
    rep = transcend.perturbation_spotcheck(transcend.transcend_build(3), 2, 10, seed=4)
    assert rep.ok


def test_state_json_is_deterministic_and_parses(state4):
    a = transcend.state_json(state4)
    assert a == transcend.state_json(transcend.transcend_build(4))
    obj = json.loads(a)
    assert [st["i"] for st in obj["steps"]] == [1, 2, 3, 4]


def test_precision_only_truncates_reported_series():
    exact = transcend.transcend_build(3)
    trunc = transcend.transcend_build(3, precision=Fraction(20))
    assert [s.lam for s in exact.steps] == [s.lam for s in trunc.steps]
    assert trunc.z_series().precision == 20
