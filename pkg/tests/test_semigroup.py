from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from valsg import semigroup as sg
from valsg.skp import dyadic_beta

int_gens = st.lists(st.integers(2, 15), min_size=1, max_size=4, unique=True)
scales = st.fractions(min_value=Fraction(1, 20), max_value=20, max_denominator=20)


def _naive_semigroup(gens, bound):
    """Elements strictly below ``bound``."""
    if bound <= 0:
        return []
    reach = {0}
    frontier = [0]
    while frontier:
        nxt = []
        for s in frontier:
            for g in gens:
                t = s + g
                if t < bound and t not in reach:
                    reach.add(t)
                    nxt.append(t)
        frontier = nxt
    return sorted(reach)


@given(int_gens, st.integers(0, 60))
def test_enumeration_matches_breadth_first_oracle(gens, bound):
    table = sg.enumerate_below(gens, bound)
    assert table.elements == _naive_semigroup(gens, bound)
    assert table.is_closed()
    for e in table:
        assert table.evaluate(table.witness(e)) == e


@settings(max_examples=40)
@given(int_gens, scales)
def test_enumeration_commutes_with_scaling(gens, c):
    a = sg.enumerate_below(gens, 40).elements
    b = sg.enumerate_below([g * c for g in gens], 40 * c).elements
    assert [x * c for x in a] == b


@given(int_gens)
def test_minimal_generators_are_irreducible(gens):
    table = sg.enumerate_below(gens, 60)
    mins = sg.minimal_generators(table)
    assert set(mins) <= set(gens)
    for g in gens:
        if g not in mins:
            assert any((g - s) in table and s not in (0, g) for s in table.elements)


@given(int_gens, st.integers(1, 30))
def test_s_value_is_least_multiple(gens, gamma):
    s = sg.s_value(gens, gamma)
    big = _naive_semigroup(gens, gamma * s + 1)
    assert gamma * s in big
    assert all(gamma * k not in big for k in range(1, s))


def test_dyadic_prefix_and_known_values():
    table = sg.enumerate_below(sg.GenStream.from_rule("dyadic-beta"), 6)
    assert table.complete
    b1, b2 = Fraction(5, 2), Fraction(21, 4)
    expected = sorted({a + b * b1 + c * b2 for a in range(6) for b in range(3) for c in range(2)
                       if a + b * b1 + c * b2 < 6})
    assert table.elements == expected
    assert sg.minimal_generators(table) == [1, b1, b2]
    assert sg.s_value([4, 6], 13) == 2


def test_plane_branch_checks():
    rep = sg.plane_branch_check([dyadic_beta(i) for i in range(6)])
    assert rep.verdict is True
    assert sg.plane_branch_check([4, 6, 9]).verdict is False
    assert sg.plane_branch_check([Fraction(1), Fraction(3, 2)]).verdict is True


def test_probe_on_finite_module_saturates():
    mod = sg.SemiModule(sg.GenStream.finite([2, 3]), sg.GenStream.finite([0, 1]))
    rep = sg.module_fin_gen_probe(mod, 20)
    assert rep.module_min_generators_below_bound == [0, 1]
    assert rep.saturated


def test_accumulation_scan_flags_dense_cluster():
    vals = sg.GenStream.finite([1 - Fraction(1, 2 ** k) for k in range(1, 12)])
    table = sg.enumerate_below(vals, Fraction(1))
    scan = sg.accumulation_scan(table, Fraction(1, 64))
    assert scan.min_gap <= Fraction(1, 2 ** 10)
    assert scan.cluster_points


def test_omega_embedding_order():
    lam = sg.GenStream.from_rule("one-minus-pow")
    emb = sg.omega_embedding(lam, 2, 6)
    keys = sorted(emb.values)
    vals = [emb.values[k] for k in keys]
    assert vals == sorted(vals) and len(set(vals)) == len(vals)


def test_unknown_rule_rejected():
    with pytest.raises(ValueError):
        sg.GenStream.from_rule("no-such-rule")
