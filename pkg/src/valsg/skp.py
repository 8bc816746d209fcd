"""The dyadic plane valuation defined by a sequence of key polynomials.

``P0 = x``, ``P1 = y`` and ``P_{i+1} = P_i^2 - x^(2^(i+1)) * P_{i-1}``, with
values ``beta_i = (2^(i+2) - 2^-i) / 3``.  A *standard monomial* is
``x^l0 * prod_{j>=1} P_j^e_j`` with ``e_j`` in ``{0, 1}``; it is stored as the
pair ``(l0, mask)`` where bit ``j-1`` of ``mask`` is ``e_j``.  Standard
monomials form a basis of ``K[x, y]`` (``K[x^-1, x, y]`` when ``l0 < 0``) and
have pairwise distinct values, so the value of a polynomial is the least
value among the standard monomials of its expansion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable

from .hahn import HahnSeries, PrecisionError, echelon
from .order import encode_value, rat_str, two_adic_exponent
from .poly import MPoly, format_poly, x_power_divide

XY = ("x", "y")
DEFAULT_MAX_INDEX = 10


class UndefinedValueError(ValueError):
    """The zero polynomial has no value."""


class SequenceTooShortError(ValueError):
    def __init__(self, needed: int, have: int):
        super().__init__(f"key polynomial sequence too short: need index {needed}, have {have}")
        self.needed = needed
        self.have = have


class InjectivityError(AssertionError):
    """Two distinct standard monomials share a value in the checked range."""


# values ---------------------------------------------------------------------------

def dyadic_beta(i: int) -> Fraction:
    if i < 0:
        raise ValueError("index must be non-negative")
    return (Fraction(2 ** (i + 2)) - Fraction(1, 2 ** i)) / 3


def dyadic_beta_recursive(i: int) -> Fraction:
    b = Fraction(1)
    for k in range(i):
        b = 2 * b + Fraction(1, 2 ** (k + 1))
    return b


def key_order(j: int) -> int:
    """Order of ``P_j`` at the maximal ideal ``(x, y)``."""
    return 1 if j == 0 else 2 ** (j - 1)


@lru_cache(maxsize=None)
def mask_value(mask: int) -> Fraction:
    total = Fraction(0)
    j = 1
    while mask:
        if mask & 1:
            total += dyadic_beta(j)
        mask >>= 1
        j += 1
    return total


@lru_cache(maxsize=None)
def mask_order(mask: int) -> int:
    return sum(key_order(j + 1) for j in range(mask.bit_length()) if mask >> j & 1)


def monomial_value(l0: int, mask: int) -> Fraction:
    return l0 + mask_value(mask)


def mask_indices(mask: int) -> list:
    return [j + 1 for j in range(mask.bit_length()) if mask >> j & 1]


def monomial_label(l0: int, mask: int) -> str:
    parts = []
    if l0:
        parts.append("x" if l0 == 1 else f"x^{l0}")
    parts.extend(f"P{j}" for j in mask_indices(mask))
    return "*".join(parts) or "1"


@lru_cache(maxsize=None)
def check_standard_injectivity(max_j: int = 10, max_l0: int = 32) -> int:
    """Check that ``(l0, mask) -> value`` is injective; returns the number checked.

    The fractional part of a value fixes the mask (the top set bit is read
    off the 2-adic denominator), which is what this exhaustive check
    confirms on the given range.
    """
    seen = {}
    for mask in range(1 << max_j):
        mv = mask_value(mask)
        for l0 in range(max_l0 + 1):
            v = mv + l0
            if v in seen:
                raise InjectivityError(f"{monomial_label(l0, mask)} and {monomial_label(*seen[v])} share value {v}")
            seen[v] = (l0, mask)
    return len(seen)


def decode_value(value) -> tuple:
    """The unique standard monomial ``(l0, mask)`` with the given value.

    ``l0`` may be negative.  Peels off ``beta_k`` where ``2^k`` is the
    denominator of what remains.
    """
    rest = Fraction(value)
    mask = 0
    while rest.denominator != 1:
        k = two_adic_exponent(rest)
        if rest.denominator != 2 ** k:
            raise ValueError(f"{value} is not a dyadic rational")
        rest -= dyadic_beta(k)
        mask |= 1 << (k - 1)
    return rest.numerator, mask


# key polynomials ------------------------------------------------------------------

@lru_cache(maxsize=None)
def key_polynomial(i: int) -> MPoly:
    if i < 0:
        raise ValueError("index must be non-negative")
    if i == 0:
        return MPoly.var(XY, "x")
    if i == 1:
        return MPoly.var(XY, "y")
    prev, prev2 = key_polynomial(i - 1), key_polynomial(i - 2)
    return prev * prev - MPoly.monomial(XY, (2 ** i, 0)) * prev2


@dataclass(frozen=True)
class KeyPoly:
    P: MPoly
    beta: Fraction
    m: int


@dataclass(frozen=True)
class KeyPolySeq:
    entries: tuple

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, i) -> KeyPoly:
        return self.entries[i]

    @property
    def max_index(self) -> int:
        return len(self.entries) - 1

    def to_json(self, with_polys: bool = True):
        out = []
        for i, e in enumerate(self.entries):
            row = {"index": i, "beta": rat_str(e.beta), "m": e.m}
            if with_polys:
                row["P"] = format_poly(e.P)
            out.append(row)
        return out


def skp_build(N: int) -> KeyPolySeq:
    if N < 1:
        raise ValueError("N must be at least 1")
    return KeyPolySeq(tuple(KeyPoly(key_polynomial(i), dyadic_beta(i), 2) for i in range(N + 1)))


def y_degree_of(j: int) -> int:
    return 0 if j == 0 else 2 ** (j - 1)


# standard expansion ---------------------------------------------------------------

def _by_y(f: MPoly) -> dict:
    rows: dict = {}
    for (a, b), c in f.terms.items():
        rows.setdefault(b, {})[a] = c
    return rows


@lru_cache(maxsize=None)
def _key_rows(j: int):
    return _by_y(key_polynomial(j))


def _divmod_y(rows: dict, j: int):
    """Divide by the monic-in-y ``P_j``; returns (quotient rows, remainder rows)."""
    d = y_degree_of(j)
    prow = _key_rows(j)
    rem = {b: dict(v) for b, v in rows.items()}
    quot: dict = {}
    for b in range(max(rem), d - 1, -1):
        lead = rem.pop(b, None)
        if not lead:
            continue
        quot[b - d] = lead
        for pb, pa in prow.items():
            if pb == d:
                continue
            tgt = rem.setdefault(b - d + pb, {})
            for a1, c1 in lead.items():
                for a2, c2 in pa.items():
                    k = a1 + a2
                    v = tgt.get(k, 0) - c1 * c2
                    if v:
                        tgt[k] = v
                    else:
                        tgt.pop(k, None)
    return quot, {b: v for b, v in rem.items() if v}


def _expand_rows(rows: dict, j: int) -> dict:
    if not rows:
        return {}
    if j == 0:
        return {(a, 0): c for a, c in rows.get(0, {}).items()}
    if max(rows) < y_degree_of(j):
        return _expand_rows(rows, j - 1)
    quot, rem = _divmod_y(rows, j)
    out = _expand_rows(rem, j - 1)
    bit = 1 << (j - 1)
    for (l0, mask), c in _expand_rows(quot, j - 1).items():
        out[(l0, mask | bit)] = c
    return out


def needed_index(f: MPoly) -> int:
    """Least ``j`` with ``deg_y f < 2^j``: expansion uses ``P_0..P_j``."""
    dy = f.degree("y")
    return 0 if dy == 0 else dy.bit_length()


@dataclass(frozen=True)
class StdExpansion:
    """``sum coeff * x^l0 * prod P_j^l_j`` with exponent vectors ``(l0, l1, ..., lk)``."""

    terms: tuple  # of (coeff, exponents)

    @classmethod
    def from_monomials(cls, mono: dict, k: int):
        terms = []
        for (l0, mask), c in sorted(mono.items(), key=lambda kv: monomial_value(*kv[0])):
            exps = (l0,) + tuple((mask >> (j - 1)) & 1 for j in range(1, k + 1))
            terms.append((c, exps))
        return cls(tuple(terms))

    def monomials(self) -> dict:
        out = {}
        for c, exps in self.terms:
            mask = 0
            for j, e in enumerate(exps[1:], start=1):
                if e:
                    mask |= 1 << (j - 1)
            out[(exps[0], mask)] = c
        return out

    def values(self) -> list:
        return [monomial_value(l0, mask) for (l0, mask) in self.monomials()]

    def reconstruct(self) -> MPoly:
        total = MPoly.zero(XY)
        for c, exps in self.terms:
            term = MPoly.monomial(XY, (exps[0], 0), c)
            for j, e in enumerate(exps[1:], start=1):
                if e:
                    term = term * key_polynomial(j)
            total = total + term
        return total

    def to_json(self):
        return [
            {"coeff": rat_str(c), "exponents": list(exps), "value": rat_str(monomial_value(*_pack(exps)))}
            for c, exps in self.terms
        ]


def _pack(exps) -> tuple:
    mask = 0
    for j, e in enumerate(exps[1:], start=1):
        if e:
            mask |= 1 << (j - 1)
    return exps[0], mask


def standard_expansion(f: MPoly, kps: KeyPolySeq | None = None) -> StdExpansion:
    """Expand ``f`` in standard monomials by successive division by key polynomials."""
    f = f.with_variables(XY) if f.variables != XY else f
    if f.is_zero():
        raise UndefinedValueError("cannot expand the zero polynomial")
    k = needed_index(f)
    if kps is not None and k > kps.max_index:
        raise SequenceTooShortError(k, kps.max_index)
    return StdExpansion.from_monomials(_expand_rows(_by_y(f), k), k)


def expansion_monomials(f: MPoly) -> dict:
    f = f.with_variables(XY) if f.variables != XY else f
    if f.is_zero():
        return {}
    return _expand_rows(_by_y(f), needed_index(f))


def nu_bar(f: MPoly) -> Fraction:
    """Value of a nonzero polynomial in ``x, y``."""
    check_standard_injectivity()
    mono = expansion_monomials(f)
    if not mono:
        raise UndefinedValueError("the zero polynomial has no value")
    return min(monomial_value(l0, mask) for (l0, mask) in mono)


def nu_bar_ratio(num: MPoly, den: MPoly) -> Fraction:
    return nu_bar(num) - nu_bar(den)


# the standard-monomial algebra -------------------------------------------------

@lru_cache(maxsize=None)
def _normal_form(counts: tuple) -> tuple:
    """Rewrite ``prod P_j^counts[j-1]`` as a sum of standard monomials.

    Uses ``P_j^2 = P_{j+1} + x^(2^(j+1)) * P_{j-1}``; each step removes one
    key-polynomial factor, so the rewriting terminates.  Returns a tuple of
    ``((dl0, mask), multiplicity)``.
    """
    k = next((i for i, c in enumerate(counts) if c >= 2), None)
    if k is None:
        mask = 0
        for i, c in enumerate(counts):
            if c:
                mask |= 1 << i
        return (((0, mask), 1),)
    j = k + 1
    base = list(counts)
    base[k] -= 2
    up = base + [0] * (j + 1 - len(base))
    up[j] += 1
    down = list(base)
    shift = 2 ** (j + 1)
    if j == 1:
        shift += 1
    else:
        down[j - 2] += 1
    acc: dict = {}
    for key, mult in _normal_form(_trim(up)):
        acc[key] = acc.get(key, 0) + mult
    for (dl0, mask), mult in _normal_form(_trim(down)):
        key = (dl0 + shift, mask)
        acc[key] = acc.get(key, 0) + mult
    return tuple(sorted(acc.items()))


def _trim(counts) -> tuple:
    counts = list(counts)
    while counts and counts[-1] == 0:
        counts.pop()
    return tuple(counts)


@lru_cache(maxsize=None)
def mask_product(m1: int, m2: int) -> tuple:
    width = max(m1.bit_length(), m2.bit_length())
    counts = tuple(((m1 >> i) & 1) + ((m2 >> i) & 1) for i in range(width))
    return _normal_form(_trim(counts))


def _min_prec(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


class SKPElem:
    """Element of ``K[x^-1, x, y]`` in the standard-monomial basis.

    ``precision`` works as for :class:`HahnSeries`: monomials whose value is
    at least the precision are unknown; ``None`` means exact.
    """

    __slots__ = ("terms", "precision")

    def __init__(self, terms: dict | None = None, precision=None):
        terms = {k: c for k, c in (terms or {}).items() if c}
        if precision is not None:
            terms = {k: c for k, c in terms.items() if monomial_value(*k) < precision}
        self.terms = terms
        self.precision = precision

    @classmethod
    def monomial(cls, l0: int, mask: int = 0, coeff=1):
        return cls({(l0, mask): Fraction(coeff)})

    @classmethod
    def key(cls, j: int):
        return cls.monomial(1, 0) if j == 0 else cls.monomial(0, 1 << (j - 1))

    @classmethod
    def from_poly(cls, f: MPoly):
        return cls(expansion_monomials(f))

    @classmethod
    def const(cls, c):
        return cls.monomial(0, 0, c)

    def is_zero(self) -> bool:
        return not self.terms and self.precision is None

    def __bool__(self):
        return bool(self.terms) or self.precision is not None

    def nu(self):
        if not self.terms:
            if self.precision is None:
                raise UndefinedValueError("zero has no value")
            raise PrecisionError(f"no known standard monomials below {self.precision}", self.precision)
        return min(monomial_value(*k) for k in self.terms)

    def _order(self):
        return self.nu() if self.terms else self.precision

    def _coerce(self, other):
        if isinstance(other, SKPElem):
            return other
        if isinstance(other, (int, Fraction)):
            return SKPElem.const(other)
        if isinstance(other, MPoly):
            return SKPElem.from_poly(other)
        raise TypeError(f"cannot combine SKPElem with {type(other).__name__}")

    def __add__(self, other):
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        terms = dict(self.terms)
        for k, c in o.terms.items():
            terms[k] = terms.get(k, 0) + c
        return SKPElem(terms, _min_prec(self.precision, o.precision))

    __radd__ = __add__

    def __neg__(self):
        return SKPElem({k: -c for k, c in self.terms.items()}, self.precision)

    def __sub__(self, other):
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c):
        return SKPElem({k: v * c for k, v in self.terms.items()}, self.precision)

    def shift_x(self, k: int):
        """Multiply by ``x^k`` (``k`` may be negative)."""
        prec = None if self.precision is None else self.precision + k
        return SKPElem({(l0 + k, m): c for (l0, m), c in self.terms.items()}, prec)

    def mul(self, other, cap=None):
        o = self._coerce(other)
        if self.is_zero() or o.is_zero():
            return SKPElem()
        prec = cap
        if self.precision is not None:
            prec = _min_prec(prec, o._order() + self.precision)
        if o.precision is not None:
            prec = _min_prec(prec, self._order() + o.precision)
        acc: dict = {}
        get = acc.get
        right = list(o.terms.items())
        if prec is not None:
            right_vals = [monomial_value(*k) for k, _ in right]
        for (a0, ma), ca in self.terms.items():
            va = monomial_value(a0, ma) if prec is not None else None
            for idx, ((b0, mb), cb) in enumerate(right):
                # every term of the product has value >= va + vb
                if prec is not None and va + right_vals[idx] >= prec:
                    continue
                cc = ca * cb
                base = a0 + b0
                for (dl0, m), mult in mask_product(ma, mb):
                    key = (base + dl0, m)
                    acc[key] = get(key, 0) + cc * mult
        return SKPElem(acc, prec)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        try:
            return self.mul(other)
        except TypeError:
            return NotImplemented

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers are not supported")
        result = SKPElem.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other):
        if not isinstance(other, SKPElem):
            return NotImplemented
        return self.terms == other.terms and self.precision == other.precision

    __hash__ = None

    def graded_image(self) -> HahnSeries:
        """Linear, value-preserving image: each standard monomial goes to ``t^value``."""
        return HahnSeries([(monomial_value(*k), c) for k, c in self.terms.items()], self.precision)

    def to_poly(self) -> MPoly:
        total = MPoly.zero(XY)
        for (l0, mask), c in self.terms.items():
            if l0 < 0:
                raise ValueError("element has negative powers of x")
            term = MPoly.monomial(XY, (l0, 0), c)
            for j in mask_indices(mask):
                term = term * key_polynomial(j)
            total = total + term
        return total

    def label(self) -> str:
        parts = []
        for (l0, mask), c in sorted(self.terms.items(), key=lambda kv: monomial_value(*kv[0])):
            parts.append(f"{rat_str(c)}*{monomial_label(l0, mask)}")
        return " + ".join(parts) or "0"

    def __repr__(self):
        return f"SKPElem({self.label()})"


# divisibility of P_i(x, xz) by x^i --------------------------------------------

@dataclass
class DivisibilityReport:
    index: int
    quotient: MPoly
    w_degree: int
    z_degree: int
    verdict: bool

    def to_json(self):
        return {
            "index": self.index,
            "quotient": format_poly(self.quotient),
            "w_degree": self.w_degree,
            "z_degree": self.z_degree,
            "verdict": self.verdict,
        }


def key_divisibility_check(i: int) -> DivisibilityReport:
    """Substitute ``y -> x*z`` in ``P_i`` and divide by ``x^i``.

    ``w_degree`` is the least ``n`` with the quotient in
    ``W_n = {sum_{k<=n} a_k(x, y) z^k}`` (a monomial ``x^a z^b`` needs
    ``k >= b - a``); the verdict is ``w_degree <= i``.  The raw
    ``z``-degree is reported too; it can exceed ``i``.
    """
    P = key_polynomial(i)
    xz = ("x", "z")
    sub = P.subst({"x": MPoly.var(xz, "x"), "y": MPoly.monomial(xz, (1, 1))}, xz)
    quotient, w_degree, z_degree = x_power_divide(sub, i)
    return DivisibilityReport(i, quotient, w_degree, z_degree, w_degree <= i)


# the modules M_n -------------------------------------------------------------------

@dataclass
class ModuleTable:
    """Elements of ``M_n`` below ``bound`` with one standard-monomial witness each."""

    n: int
    bound: Fraction
    elements: list
    witnesses: dict

    def __contains__(self, v):
        return v in self.witnesses

    def to_json(self):
        return {
            "n": self.n,
            "bound": rat_str(self.bound),
            "elements": [rat_str(e) for e in self.elements],
            "witnesses": {rat_str(e): monomial_label(*self.witnesses[e]) for e in self.elements},
        }


def _max_index_below(bound) -> int:
    j = 0
    while dyadic_beta(j + 1) < bound:
        j += 1
    return j


def standard_monomials_below(bound, min_order: int = 0):
    """Standard monomials ``(l0, mask)`` with value ``< bound`` and order ``>= min_order``."""
    bound = Fraction(bound)
    top = _max_index_below(bound)
    out = []
    for mask in range(1 << top):
        mv = mask_value(mask)
        if mv >= bound:
            continue
        mo = mask_order(mask)
        l0_min = max(0, min_order - mo)
        l0 = l0_min
        while mv + l0 < bound:
            out.append((l0, mask))
            l0 += 1
    return out


def module_Mn(n: int, bound) -> ModuleTable:
    """``M_n`` below ``bound``: values of ``(x, y)^n`` shifted down by ``n``.

    The ideal ``(x, y)^n`` is spanned by standard monomials of order
    ``>= n`` (order is additive on products), so its values are exactly
    theirs; this is checked against :func:`module_Mn_bruteforce`.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    bound = Fraction(bound)
    witnesses = {}
    for l0, mask in standard_monomials_below(bound + n, n):
        witnesses[monomial_value(l0, mask) - n] = (l0, mask)
    elements = sorted(witnesses)
    return ModuleTable(n, bound, elements, witnesses)


def module_Mn_bruteforce(n: int, bound, degree: int | None = None) -> list:
    """Values of ``sum a_k z^k`` (``z = y/x``, ``k <= n``) below ``bound``.

    Computed as the value spectrum of ``span{x^a y^b : n <= a+b <= D}``
    shifted by ``-n``.  ``D = ceil(bound) + n`` suffices: a monomial of
    degree ``> v`` has value ``> v`` and can be dropped without changing a
    value ``v``.
    """
    bound = Fraction(bound)
    D = degree if degree is not None else math.ceil(bound) + n
    images = []
    for total in range(n, D + 1):
        for b in range(total + 1):
            images.append(SKPElem.from_poly(MPoly.monomial(XY, (total - b, b))).graded_image())
    basis, _ = echelon(images)
    return sorted(s.terms[0][0] - n for s in basis if s.terms[0][0] - n < bound)


def module_coset_generators(params, bound, horizon):
    """Coset generators of ``M_n`` below ``bound``: ``U_n`` and ``beta_j - n`` (``j >= n``)."""
    n = int(params["n"])
    bound = Fraction(bound)
    if n == 0:
        return [Fraction(0)], True
    table = module_Mn(n, bound)
    unit = Fraction(1, 2 ** (n - 1))
    gens = [e for e in table.elements if (e / unit).denominator == 1]
    j = n
    while True:
        v = dyadic_beta(j) - n
        if v >= bound:
            break
        gens.append(v)
        j += 1
    return sorted(set(gens)), True


@dataclass
class GeneratorWitness:
    j: int
    value: Fraction
    in_module: bool
    denominator: int
    psi_denominator_bound: int
    certificate: str

    def to_json(self):
        return {
            "j": self.j,
            "value": rat_str(self.value),
            "in_module": self.in_module,
            "denominator": self.denominator,
            "psi_denominator_bound": self.psi_denominator_bound,
            "certificate": self.certificate,
        }


def new_generator_witness(n: int, J: int) -> list:
    """Certify ``beta_j - n`` (``n <= j <= J``) as new module generators.

    ``beta_j - n`` lies in ``M_n`` since ``P_j`` has order ``2^(j-1) >= n``.
    An element of the module generated by ``U_n`` and ``beta_k - n``
    (``n <= k < j``) that is ``<= beta_j - n`` is a shift plus an element of
    ``M_0`` below ``beta_j``; such elements only involve ``beta_0..beta_{j-1}``,
    so everything there lies in ``2^-(j-1) Z`` while ``beta_j - n`` has
    denominator ``2^j``.
    """
    if n < 1 or J < n:
        raise ValueError("need n >= 1 and J >= n")
    out = []
    for j in range(n, J + 1):
        v = dyadic_beta(j) - n
        in_module = key_order(j) >= n
        den = v.denominator
        bound = 2 ** (j - 1)
        ok = in_module and den == 2 ** j and den > bound
        cert = (
            f"denominator {den} does not divide {bound}; elements of the smaller module "
            f"up to {rat_str(v)} lie in (1/{bound})Z"
        )
        out.append(GeneratorWitness(j, v, in_module, den, bound, cert if ok else "certificate failed"))
    return out


def psi_below(n: int, j: int, bound) -> list:
    """Explicit elements of the module generated by ``U_n`` and ``beta_k - n`` (``n <= k < j``) below ``bound``."""
    bound = Fraction(bound)
    unit = Fraction(1, 2 ** (n - 1))
    table = module_Mn(n, bound)
    u_n = [e for e in table.elements if (e / unit).denominator == 1]
    shifts = [dyadic_beta(k) - n for k in range(n, j)]
    m0 = [monomial_value(l0, mask) for l0, mask in standard_monomials_below(bound + n)]
    out = set()
    for s in u_n + shifts:
        for m in m0:
            if s + m < bound:
                out.add(s + m)
    return sorted(out)
