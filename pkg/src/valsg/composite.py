"""Rank-two valuations: a monomial example in Z^2 (lex) and a composite valuation.

The composite valuation lives on ``K[x, y, u, v]``: ``u -> t`` and
``v -> (y/x) t + t^alpha`` with ``alpha = sqrt(2)``, followed by the dyadic
valuation on the coefficient field ``K(x, y)``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

from .hahn import HahnSeries, subst_series
from .order import ALPHA, QUAD, RAT, GroupElem, QuadRat, encode_value, rat_str
from .poly import MPoly, RatFunc, format_poly
from .semigroup import GenStream, enumerate_below, int_rule
from .skp import XY, dyadic_beta, key_polynomial, module_Mn, nu_bar, standard_monomials_below, monomial_value

XYUV = ("x", "y", "u", "v")
COMPOSITE_SIGNATURE = (QUAD, RAT)


# the Z^2 example -------------------------------------------------------------------

def _a(i: int, a_rule) -> int:
    return 0 if i == 2 else a_rule(i)


def z2_gamma(i: int, a_rule="2^i", b_rule="i") -> GroupElem:
    """``gamma_1 = (0,1)``, ``gamma_2 = (1,0)``, ``gamma_i = (b_i, a_{i-1} - a_i)`` (``a_2 = 0``)."""
    fa = int_rule(a_rule) if isinstance(a_rule, str) else a_rule
    fb = int_rule(b_rule) if isinstance(b_rule, str) else b_rule
    if i == 1:
        return GroupElem((0, 1))
    if i == 2:
        return GroupElem((1, 0))
    return GroupElem((fb(i), _a(i - 1, fa) - fa(i)))


class ConstraintError(ValueError):
    def __init__(self, message, index):
        super().__init__(f"{message} (index {index})")
        self.index = index


@dataclass
class ConeResult:
    inside: bool
    rays: tuple
    certificate: tuple | None  # functional (c1, c2): c1*p + c2*q >= 0 on the cone, < 0 at gamma

    def to_json(self):
        return {
            "inside": self.inside,
            "rays": [[rat_str(c) for c in r] for r in self.rays],
            "separator": None if self.certificate is None else [rat_str(c) for c in self.certificate],
        }


def _cross(a, b):
    return a[0] * b[1] - a[1] * b[0]


def _coords(v):
    return tuple(Fraction(c) for c in (v.coords if isinstance(v, GroupElem) else v))


def cone_check(gamma, prior) -> ConeResult:
    """Exact membership of ``gamma`` in the closed cone spanned by ``prior``.

    All vectors must be lex-positive, so the cone is pointed and spanned by
    its clockwise-most and counter-clockwise-most generators.  When
    ``gamma`` is outside, the certificate is a linear functional that is
    ``>= 0`` on every prior generator and ``< 0`` at ``gamma``.
    """
    vecs = [_coords(p) for p in prior]
    g = _coords(gamma)
    for v in vecs + [g]:
        if not (v[0] > 0 or (v[0] == 0 and v[1] > 0)):
            raise ValueError(f"vector {v} is not lex-positive")
    lo = hi = vecs[0]
    for v in vecs[1:]:
        if _cross(lo, v) < 0:
            lo = v
        if _cross(hi, v) > 0:
            hi = v
    if _cross(lo, g) < 0:
        cert = (-lo[1], lo[0])  # p -> cross(lo, p)
        return ConeResult(False, (lo, hi), cert)
    if _cross(g, hi) < 0:
        cert = (hi[1], -hi[0])  # p -> cross(p, hi)
        return ConeResult(False, (lo, hi), cert)
    return ConeResult(True, (lo, hi), None)


def _evaluate_functional(cert, v):
    v = _coords(v)
    return cert[0] * v[0] + cert[1] * v[1]


@dataclass
class Z2Index:
    i: int
    gamma: GroupElem
    series_gamma: GroupElem
    outside_cone: bool | None
    separator: tuple | None
    multiples_in_prefix: list

    @property
    def matches_closed_form(self) -> bool:
        return self.gamma == self.series_gamma

    def to_json(self):
        return {
            "i": self.i,
            "gamma": encode_value(self.gamma),
            "series_gamma": encode_value(self.series_gamma),
            "matches_closed_form": self.matches_closed_form,
            "outside_cone": self.outside_cone,
            "separator": None if self.separator is None else [rat_str(c) for c in self.separator],
            "multiples_in_prefix": [[k, encode_value(w)] for k, w in self.multiples_in_prefix],
        }


@dataclass
class Z2Example:
    a_rule: str
    b_rule: str
    lambda_rule: str
    depth: int
    gammas: list
    u_series: dict
    indices: list
    bound: GroupElem
    warnings: list = field(default_factory=list)

    def to_json(self):
        return {
            "a_rule": self.a_rule,
            "b_rule": self.b_rule,
            "lambda_rule": self.lambda_rule,
            "depth": self.depth,
            "bound": encode_value(self.bound),
            "gammas": [encode_value(g) for g in self.gammas],
            "indices": [ix.to_json() for ix in self.indices],
            "u_series": {str(i): s.to_json() for i, s in sorted(self.u_series.items())},
            "warnings": self.warnings,
        }


def _lambda_rule(expr):
    f = int_rule(expr)
    return lambda i: Fraction(f(i))


def z2_build(a_rule="2^i", b_rule="i", lambda_rule="1", depth: int = 6, bound=(12, 64), extra_terms: int = 3) -> Z2Example:
    """Build ``u_3, ..., u_depth`` as truncated series and check each ``gamma_i``.

    ``u_3 = sum_{k>=3} lambda_k t^(b_k, -a_k)`` is truncated after
    ``depth + extra_terms`` terms; ``u_{i+1} = u_1^(a_i - a_{i-1}) u_i - lambda_i u_2^(b_i)``.
    For every ``i >= 3`` the cone test and the search for multiples of
    ``gamma_i`` in ``S_{i-1}`` (inside the rectangular ``bound``) are
    recorded, not enforced.
    """
    if depth < 3:
        raise ValueError("depth must be at least 3")
    fa, fb, fl = int_rule(a_rule), int_rule(b_rule), _lambda_rule(lambda_rule)
    top = depth + extra_terms
    for i in range(3, top + 1):
        if fb(i) < 1:
            raise ConstraintError("b_i must be positive", i)
        if fl(i) == 0:
            raise ConstraintError("lambda_i must be nonzero", i)
        if i > 3 and fb(i) <= fb(i - 1):
            raise ConstraintError("b must increase", i)
    ratios = [(i, Fraction(fa(i + 1) - fa(i), fb(i + 1))) for i in range(3, top)]
    for (i, r) in ratios:
        if r <= 0:
            raise ConstraintError("ratio (a_{i+1}-a_i)/b_{i+1} must be positive", i)
    for (i, r), (_, r2) in zip(ratios, ratios[1:]):
        if r2 <= r:
            raise ConstraintError("ratios (a_{i+1}-a_i)/b_{i+1} must increase strictly", i + 1)
    warnings = []
    base_ratio = Fraction(fa(3), fb(3))
    if ratios and base_ratio >= ratios[0][1]:
        warnings.append(
            f"a_3/b_3 = {rat_str(base_ratio)} is not below (a_4-a_3)/b_4 = {rat_str(ratios[0][1])}: "
            "gamma_4 falls inside the cone of S_3"
        )
    sig = (RAT, RAT)
    prec = GroupElem((fb(top + 1), -fa(top + 1)), sig)
    u = {3: HahnSeries([(GroupElem((fb(k), -fa(k)), sig), fl(k)) for k in range(3, top + 1)], prec)}
    for i in range(3, depth):
        shift = GroupElem((0, fa(i) - _a(i - 1, fa)), sig)
        u[i + 1] = u[i].shift(shift) - HahnSeries.monomial(GroupElem((fb(i), 0), sig), fl(i))
    gammas = [z2_gamma(i, fa, fb) for i in range(1, depth + 1)]
    bound_elem = GroupElem(bound, sig)
    indices = []
    for i in range(3, depth + 1):
        series_gamma = u[i].t_valuation()
        cone = cone_check(gammas[i - 1], gammas[: i - 1])
        multiples = _multiples_in_prefix(gammas[: i - 1], gammas[i - 1], bound_elem)
        indices.append(Z2Index(i, gammas[i - 1], series_gamma, not cone.inside, cone.certificate, multiples))
    return Z2Example(a_rule, b_rule, lambda_rule, depth, gammas, u, indices, bound_elem, warnings)


def _multiples_in_prefix(prefix, gamma, bound):
    table = enumerate_below(GenStream.finite(prefix), bound)
    found = []
    k = 1
    while True:
        v = gamma * k
        if not all(a < b for a, b in zip(v.coords, bound.coords)):
            break
        if v in table:
            found.append((k, v))
        k += 1
    return found


# the composite valuation -------------------------------------------------------------

def composite_exponent(j: int, k: int) -> QuadRat:
    return QuadRat(k - j, j)


def _split_uv(f: MPoly) -> dict:
    """Coefficients ``a_{ij}`` in ``K[x, y]`` of ``u^i v^j``."""
    if f.variables != XYUV:
        f = f.with_variables(XYUV)
    out: dict = {}
    for (a, b, i, j), c in f.terms.items():
        out.setdefault((i, j), {})[(a, b)] = c
    return {key: MPoly(XY, t) for key, t in out.items()}


def phi_numerator(coeffs: dict, j: int, k: int) -> MPoly:
    """``x^(k-j) * phi_jk = sum_{i=j..k} a_{k-i,i} C(i,j) y^(i-j) x^(k-i)``."""
    total = MPoly.zero(XY)
    for i in range(j, k + 1):
        a = coeffs.get((k - i, i))
        if a is None:
            continue
        total = total + a * MPoly.monomial(XY, (k - i, i - j), comb(i, j))
    return total


def composite_value(f: MPoly) -> GroupElem:
    """``(nu_1(f), second)`` in ``(Z + alpha Z) x Q`` with lex order."""
    coeffs = _split_uv(f)
    if not coeffs:
        raise ValueError("the zero polynomial has no value")
    kmax = max(i + j for i, j in coeffs)
    best = None
    for k in range(kmax + 1):
        for j in range(k + 1):
            e = composite_exponent(j, k)
            if best is not None and not e < best[0]:
                continue
            N = phi_numerator(coeffs, j, k)
            if not N.is_zero():
                best = (e, N, k - j)
    e, N, shift = best
    return GroupElem((e, nu_bar(N) - shift), COMPOSITE_SIGNATURE)


def composite_series(f: MPoly) -> HahnSeries:
    """``f(x, y, t, (y/x) t + t^alpha)`` as a series with coefficients in ``K(x, y)``."""
    zero = QuadRat(0)
    one = RatFunc.const(XY, 1)
    x = RatFunc(MPoly.var(XY, "x"))
    y = RatFunc(MPoly.var(XY, "y"))
    assignment = {
        "x": HahnSeries.constant(x, zero),
        "y": HahnSeries.constant(y, zero),
        "u": HahnSeries.monomial(QuadRat(1), one),
        "v": HahnSeries([(QuadRat(1), y / x), (ALPHA, one)]),
    }
    g = f.with_variables(XYUV) if f.variables != XYUV else f
    return subst_series(g, assignment)


def composite_value_by_series(f: MPoly) -> GroupElem:
    """Same value as :func:`composite_value`, read off the substituted series."""
    s = composite_series(f)
    e, c = s.leading()
    return GroupElem((e, nu_bar(c.num) - nu_bar(c.den)), COMPOSITE_SIGNATURE)


def parse_level(text: str):
    """``"n"`` or ``"n*alpha"`` -> ``(n, is_alpha)``."""
    t = text.replace(" ", "")
    if t.endswith("*alpha"):
        return int(t[: -len("*alpha")]), True
    if t == "alpha":
        return 1, True
    return int(t), False


def _random_xy(rng: random.Random, degree: int, nterms: int = 3) -> MPoly:
    terms = {}
    for _ in range(nterms):
        a = rng.randint(0, degree)
        b = rng.randint(0, degree - a)
        terms[(a, b)] = Fraction(rng.choice([-3, -2, -1, 1, 2, 3]))
    return MPoly(XY, terms)


def _lift(p: MPoly) -> MPoly:
    return p.with_variables(XYUV)


@dataclass
class SliceReport:
    level: str
    observed: list
    reference: str
    outside_reference: list
    witnesses: list

    @property
    def contained(self) -> bool:
        return not self.outside_reference

    def to_json(self):
        return {
            "level": self.level,
            "observed": [rat_str(v) for v in self.observed],
            "reference": self.reference,
            "contained": self.contained,
            "outside_reference": [rat_str(v) for v in self.outside_reference],
            "witnesses": self.witnesses,
        }


def F_slice(level: str, degree_bound: int = 4, bound=8, samples: int = 60, seed: int = 0) -> SliceReport:
    """Second components of sampled values at first component ``level``.

    Level ``n``: samples ``sum_i a_{n-i,i} u^(n-i) v^i`` plus ``x*P_j``-style
    witnesses ``A u + B v`` with ``P_j = x*B + y*A``; compared with ``M_n``.
    Level ``n*alpha``: samples ``h * (x v - y u)^n``; compared with ``n + M_0``.
    """
    n, is_alpha = parse_level(level)
    bound = Fraction(bound)
    rng = random.Random(seed)
    u = MPoly.var(XYUV, "u")
    v = MPoly.var(XYUV, "v")
    observed = set()
    witnesses = []
    target_first = QuadRat(0, n) if is_alpha else QuadRat(n)
    if is_alpha:
        base = (_lift(MPoly.var(XY, "x")) * v - _lift(MPoly.var(XY, "y")) * u) ** n
        ref_values = {m + n for m in (monomial_value(*s) for s in standard_monomials_below(bound))}
        reference = f"{n} + M_0"
        polys = [_lift(_random_xy(rng, degree_bound)) * base for _ in range(samples)]
        polys.append(_lift(MPoly.var(XY, "x")) * base)
    else:
        ref_values = set(module_Mn(n, bound).elements)
        reference = f"M_{n}"
        polys = []
        for _ in range(samples):
            f = MPoly.zero(XYUV)
            for i in range(n + 1):
                f = f + _lift(_random_xy(rng, degree_bound)) * u ** (n - i) * v ** i
            polys.append(f)
        if n >= 1:
            polys.append(v * u ** (n - 1))
            j = 1
            while dyadic_beta(j) - n < bound and j <= 8:
                if 2 ** (j - 1) >= n:
                    polys.append(_key_split(j, n, u, v))
                j += 1
    for f in polys:
        if f.is_zero():
            continue
        val = composite_value(f)
        if val[0] != target_first:
            continue
        second = val[1]
        if second < bound:
            observed.add(second)
    seen = set()
    for f in polys[samples:]:
        text = format_poly(f)
        if text in seen:
            continue
        seen.add(text)
        witnesses.append({"poly": text, "value": encode_value(composite_value(f))})
    obs = sorted(observed)
    outside = [s for s in obs if s not in ref_values]
    return SliceReport(level, obs, reference, outside, witnesses)


def _key_split(j: int, n: int, u: MPoly, v: MPoly) -> MPoly:
    """A polynomial at level ``n`` whose second component is ``beta_j - n``.

    ``P_j`` has order ``>= n``, so it is a sum of ``c * x^(n-i) y^i * m``; the
    matching ``m * u^(n-i) v^i`` terms give ``phi_0n = P_j / x^n``.
    """
    P = key_polynomial(j)
    f = MPoly.zero(XYUV)
    for (a, b), c in P.terms.items():
        i = min(b, n)
        rest = (a - (n - i), b - i)
        f = f + MPoly.monomial(XYUV, (rest[0], rest[1], n - i, i), c)
    return f


def phi_polynomials(k: int, coeffs: list) -> list:
    """``Phi_jk(W) = sum_{i=j..k} a_{k-i,i} C(i,j) W^(i-j)`` over ``x, y, W``."""
    vars3 = ("x", "y", "W")
    out = []
    for j in range(k + 1):
        total = MPoly.zero(vars3)
        for i in range(j, k + 1):
            a = coeffs[i].with_variables(vars3)
            total = total + a * MPoly.monomial(vars3, (0, 0, i - j), comb(i, j))
        out.append(total)
    return out


def phi_derivative_check(k: int, coeffs: list) -> bool:
    """``d^j/dW^j Phi_0k = j! Phi_jk`` for ``j = 0..k``; ``coeffs[i]`` is ``a_{k-i,i}``."""
    if len(coeffs) != k + 1:
        raise ValueError("need k+1 coefficients a_{k-i,i}")
    phis = phi_polynomials(k, coeffs)
    fact = 1
    for j in range(k + 1):
        if j:
            fact *= j
        if phis[0].derivative("W", j) != phis[j].scale(fact):
            return False
    return True


def random_phi_coeffs(k: int, seed: int = 0, degree: int = 3) -> list:
    rng = random.Random(seed)
    return [_random_xy(rng, degree) for _ in range(k + 1)]
