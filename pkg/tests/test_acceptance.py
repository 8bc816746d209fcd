"""Acceptance criteria 1-13, one test each (PASS/FAIL lines print in the terminal summary)."""

import random
import time
from fractions import Fraction

import pytest

from conftest import random_xy
from valsg import composite, fatpoints, semigroup, skp, transcend
from valsg.hahn import HahnSeries
from valsg.linalg import rank_q
from valsg.order import ALPHA, GroupElem, QuadRat
from valsg.poly import parse_poly

beta = skp.dyadic_beta


@pytest.mark.criterion(1, "beta identities for 0 <= i <= 30 (exact)")
def test_criterion_01_beta_identities():
    for i in range(31):
        assert 2 * beta(i) + Fraction(1, 2 ** (i + 1)) == Fraction(2 ** (i + 3) - Fraction(1, 2 ** (i + 1)), 3)
        assert skp.dyadic_beta_recursive(i + 1) == beta(i + 1)
        assert beta(i) == (Fraction(2 ** (i + 2)) - Fraction(1, 2 ** i)) / 3
        if i >= 1:
            assert 2 * beta(i) == beta(i - 1) + 2 ** (i + 1)


@pytest.mark.criterion(2, "key polynomial values, expansion reconstruction, multiplicativity")
def test_criterion_02_key_values():
    start = time.time()
    for i in range(9):
        assert skp.nu_bar(skp.key_polynomial(i)) == beta(i)
    rng = random.Random(2)
    for _ in range(200):
        f = random_xy(rng, 40, rng.randint(1, 6))
        assert skp.standard_expansion(f).reconstruct() == f
    for _ in range(200):
        f = random_xy(rng, 12, rng.randint(1, 4))
        g = random_xy(rng, 12, rng.randint(1, 4))
        assert skp.nu_bar(f * g) == skp.nu_bar(f) + skp.nu_bar(g)
    assert time.time() - start <= 60


@pytest.mark.criterion(3, "P_i(x, xz) divisible by x^i with quotient in W_i, i <= 8")
def test_criterion_03_divisibility():
    for i in range(9):
        rep = skp.key_divisibility_check(i)
        assert rep.verdict, rep.to_json()
        assert rep.w_degree <= i


@pytest.mark.criterion(4, "closed-form M_n below 6 equals brute force, n = 1, 2, 3")
def test_criterion_04_modules():
    for n in (1, 2, 3):
        assert skp.module_Mn(n, 6).elements == skp.module_Mn_bruteforce(n, 6)
    assert skp.module_Mn(1, 2).elements == [0, 1, Fraction(3, 2)]


@pytest.mark.criterion(5, "beta_j - n are new module generators with denominator certificates")
def test_criterion_05_new_generators():
    for n in (1, 2):
        ws = skp.new_generator_witness(n, 10)
        assert [w.j for w in ws] == list(range(n, 11))
        for w in ws:
            assert w.in_module
            assert w.value == beta(w.j) - n
            assert w.denominator == 2 ** w.j > w.psi_denominator_bound
            assert w.value in skp.module_Mn(n, w.value + 1)
        # explicit enumeration of the smaller module for small j
        for w in ws[:4]:
            assert w.value not in skp.psi_below(n, w.j, w.value + 1)


@pytest.mark.criterion(6, "plane branch criterion and scaling invariance")
def test_criterion_06_plane_criterion():
    assert semigroup.plane_branch_check([4, 6, 13]).verdict is True
    assert semigroup.plane_branch_check([4, 6, 9]).verdict is False
    rng = random.Random(6)
    for k in range(1, 7):
        gens = [beta(i) * 2 ** k for i in range(k + 1)]
        assert semigroup.plane_branch_check(gens).verdict is True
    for gens in ([4, 6, 13], [4, 6, 9], [beta(i) for i in range(4)]):
        base = semigroup.plane_branch_check(gens).verdict
        for _ in range(10):
            c = Fraction(rng.randint(1, 50), rng.randint(1, 50))
            assert semigroup.plane_branch_check([g * c for g in gens]).verdict is base


@pytest.mark.criterion(7, "finite generation probe: M_1 never saturates, M_0 is {0}")
def test_criterion_07_probe():
    base = semigroup.GenStream.from_rule("dyadic-beta")
    m1 = semigroup.SemiModule(base, semigroup.GenStream.from_rule("dyadic-module", n=1))
    lists = []
    for bound in (6, 12, 24):
        rep = semigroup.module_fin_gen_probe(m1, bound)
        assert rep.saturated is False
        lists.append(rep.module_min_generators_below_bound)
    assert len(lists[0]) < len(lists[1]) < len(lists[2])
    assert lists[0] == lists[1][: len(lists[0])] and lists[1] == lists[2][: len(lists[1])]
    m0 = semigroup.SemiModule(base, semigroup.GenStream.from_rule("dyadic-module", n=0))
    rep = semigroup.module_fin_gen_probe(m0, 6)
    assert rep.module_min_generators_below_bound == [0] and rep.saturated is True


@pytest.mark.criterion(8, "fat points s = 4: vanishing, lower bound, seed stability, F_p = Q")
def test_criterion_08_fatpoints():
    start = time.time()
    reports = [fatpoints.semigroup_scan(4, 12, 3, seed=seed) for seed in (1, 2, 3)]
    for rep in reports:
        assert rep.vanishing_violations == []
        assert rep.lower_bound_violations == []
        assert rep.cone_violations == []
    assert reports[0].dims == reports[1].dims == reports[2].dims
    pq = fatpoints.random_points(16, 1, fatpoints.RATIONAL)
    pp = fatpoints.random_points(16, 1)
    assert pq.points == pp.points
    for d in range(7):
        for n in range(3):
            assert fatpoints.fatpoint_dim(d, n, pq).dim == fatpoints.fatpoint_dim(d, n, pp).dim
    assert time.time() - start <= 120


@pytest.mark.criterion(9, "composite valuation values, slices and phi identity")
def test_criterion_09_composite():
    V = composite.XYUV
    cv = composite.composite_value
    sig = composite.COMPOSITE_SIGNATURE
    u, v = parse_poly("u", V), parse_poly("v", V)
    w = parse_poly("x*v - y*u", V)
    assert cv(u) == GroupElem((QuadRat(1), 0), sig)
    assert cv(v) == GroupElem((QuadRat(1), Fraction(3, 2)), sig)
    assert cv(w) == GroupElem((ALPHA, 1), sig)
    rng = random.Random(9)
    for n in (1, 2, 3):
        for _ in range(20):
            h = random_xy(rng, 6, rng.randint(1, 4))
            f = (w ** n) * h.with_variables(V)
            assert cv(f) == GroupElem((ALPHA * n, n + skp.nu_bar(h)), sig)
    rep = composite.F_slice("1")
    assert rep.contained and rep.observed
    assert all(val in skp.module_Mn(1, 8) for val in rep.observed)
    for k in range(1, 5):
        assert composite.phi_derivative_check(k, composite.random_phi_coeffs(k, seed=k))


@pytest.mark.criterion(10, "Z^2 example with a_i = 2^i, b_i = i: gamma_i outside cone(S_{i-1}), 3 <= i <= 10")
def test_criterion_10_z2_example():
    ex = composite.z2_build("2^i", "i", "1", depth=10, bound=(12, 64))
    bad = []
    for ix in ex.indices:
        assert ix.matches_closed_form
        if ix.outside_cone:
            prior = ex.gammas[: ix.i - 1]
            assert all(composite._evaluate_functional(ix.separator, g) >= 0 for g in prior)
            assert composite._evaluate_functional(ix.separator, ix.gamma) < 0
        if not ix.outside_cone or ix.multiples_in_prefix:
            bad.append((ix.i, str(ix.gamma), [(k, str(m)) for k, m in ix.multiples_in_prefix]))
    # With these defaults gamma_4 = (4, -8) = gamma_2 + gamma_3 lies in S_3.
    assert not bad, f"indices inside cone(S_(i-1)) or with multiples in S_(i-1): {bad}"


@pytest.mark.criterion(11, "transcendence construction to depth 6")
def test_criterion_11_transcend():
    state = transcend.transcend_build(6)
    assert state.check_invariants() == []
    steps = state.steps
    for s in steps:
        assert s.alpha > s.tau
    assert all(a.lam < b.lam for a, b in zip(steps, steps[1:]))
    for (i, j), val in transcend.difference_values(state).items():
        assert val == steps[i].alpha, (i, j)
    rep = transcend.perturbation_spotcheck(transcend.transcend_build(5), 3, 50, seed=11)
    assert rep.ok and rep.nonzero == 50
    assert transcend.state_json(transcend.transcend_build(6)) == transcend.state_json(state)


@pytest.mark.criterion(12, "omega^m embeddings and accumulation scans")
def test_criterion_12_ordinals():
    lam = semigroup.GenStream.from_rule("one-minus-pow")
    for m in (2, 3):
        emb = semigroup.omega_embedding(lam, m, 10)
        pts = sorted(emb.values)
        vals = [emb.values[a] for a in pts]
        assert all(x < y for x, y in zip(vals, vals[1:]))
        for a in pts:
            idx = emb.indices[a]
            assert len(idx) == m
            assert sum(lam.value(j) for j in idx) == emb.values[a]
    table = semigroup.spq_build(2, 3, 12, 2)
    scan = semigroup.accumulation_scan(table, Fraction(1, 64))
    assert scan.min_gap <= Fraction(1, 2 ** 12)
    assert any(abs(c - 1) < Fraction(1, 32) for c in scan.cluster_points)
    m0 = semigroup.enumerate_below(semigroup.GenStream.from_rule("dyadic-beta"), 6)
    assert semigroup.accumulation_scan(m0, Fraction(1, 64)).cluster_points == []


def _exact_rank(series_list):
    exps = sorted({e for s in series_list for e, _ in s.terms})
    rows = [[s.coefficient(e) for e in exps] for s in series_list]
    return rank_q(rows) if rows and exps else 0


@pytest.mark.criterion(13, "|E| equals span dimension on 100 random series families")
def test_criterion_13_spectrum():
    rng = random.Random(13)
    exps = [Fraction(k, 4) for k in range(24)]
    for _ in range(100):
        size = rng.randint(1, 8)
        base = [HahnSeries({e: Fraction(rng.randint(-3, 3)) for e in rng.sample(exps, rng.randint(1, 5))})
                for _ in range(size)]
        # add dependent combinations so some families are rank deficient
        fam = list(base)
        for _ in range(rng.randint(0, 3)):
            a, b = rng.sample(range(len(base)), 2) if len(base) > 1 else (0, 0)
            fam.append(base[a].scale(Fraction(rng.randint(1, 3))) + base[b])
        fam = [s for s in fam if s.terms]
        rep = transcend.value_spectrum(fam)
        assert rep.dimension == len(rep.values) == _exact_rank(fam)
        assert all(x < y for x, y in zip(rep.values, rep.values[1:]))
