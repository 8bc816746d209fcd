"""Truncated generalized power series with a precision cutoff.

A :class:`HahnSeries` stores finitely many terms ``c * t^e`` with strictly
increasing exponents and an optional precision ``p``: every term with
exponent ``>= p`` is unknown.  ``precision=None`` means the series is exact.
Exponents may be rationals, :class:`QuadRat` or :class:`GroupElem`;
coefficients are anything with field operations and a truth value
(``Fraction`` or :class:`RatFunc`).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping

from .order import GroupElem, encode_value, decode_value, rat_str
from .poly import MPoly, RatFunc


class PrecisionError(ArithmeticError):
    """A result would depend on terms beyond the known precision."""

    def __init__(self, message, limit=None):
        super().__init__(message)
        self.limit = limit


class AtLeast:
    """Valuation status of a series with no known terms: ``>= bound``."""

    __slots__ = ("bound",)

    def __init__(self, bound):
        self.bound = bound

    def __eq__(self, other):
        return isinstance(other, AtLeast) and self.bound == other.bound

    def __repr__(self):
        return f"AtLeast({self.bound})"

    def __str__(self):
        return f">= {self.bound}"


def _min_prec(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return a if a < b else b


def _zero_of(e):
    return e - e


def _encode_coeff(c):
    if isinstance(c, RatFunc):
        return str(c)
    return rat_str(c)


class HahnSeries:
    __slots__ = ("terms", "precision")

    def __init__(self, terms: Mapping | Iterable = (), precision=None):
        items = terms.items() if isinstance(terms, Mapping) else terms
        merged: dict = {}
        for e, c in items:
            if e in merged:
                merged[e] = merged[e] + c
            else:
                merged[e] = c
        kept = [(e, c) for e, c in merged.items() if c and (precision is None or e < precision)]
        kept.sort(key=lambda ec: _SortKey(ec[0]))
        object.__setattr__(self, "terms", tuple(kept))
        object.__setattr__(self, "precision", precision)

    def __setattr__(self, name, value):
        raise AttributeError("HahnSeries is immutable")

    # constructors ---------------------------------------------------------

    @classmethod
    def monomial(cls, exponent, coeff=1, precision=None):
        return cls([(exponent, Fraction(coeff) if isinstance(coeff, int) else coeff)], precision)

    @classmethod
    def constant(cls, coeff, zero_exponent=Fraction(0)):
        return cls.monomial(zero_exponent, coeff)

    @classmethod
    def zero(cls, precision=None):
        return cls((), precision)

    # queries ----------------------------------------------------------------

    @property
    def exact(self) -> bool:
        return self.precision is None

    def is_zero(self) -> bool:
        """True only for the exact zero series."""
        return not self.terms and self.precision is None

    def has_known_terms(self) -> bool:
        return bool(self.terms)

    def leading(self):
        if not self.terms:
            raise PrecisionError(f"no known terms below precision {self.precision}", self.precision)
        return self.terms[0]

    def t_valuation(self):
        """Least exponent with nonzero coefficient, or ``AtLeast(precision)``."""
        if self.terms:
            return self.terms[0][0]
        if self.precision is None:
            raise ValueError("valuation of the zero series is undefined")
        return AtLeast(self.precision)

    def _order(self):
        """Valuation or, with no known terms, the precision (a lower bound)."""
        if self.terms:
            return self.terms[0][0]
        return self.precision

    def _zero_exponent(self):
        if self.terms:
            return _zero_of(self.terms[0][0])
        if self.precision is not None:
            return _zero_of(self.precision)
        return Fraction(0)

    def coefficient(self, exponent):
        if self.precision is not None and not exponent < self.precision:
            raise PrecisionError(f"coefficient of t^{exponent} is beyond precision {self.precision}", self.precision)
        for e, c in self.terms:
            if e == exponent:
                return c
        return Fraction(0)

    def truncate(self, precision) -> "HahnSeries":
        return HahnSeries(self.terms, _min_prec(self.precision, precision))

    # arithmetic -------------------------------------------------------------

    def _coerce(self, other) -> "HahnSeries":
        if isinstance(other, HahnSeries):
            return other
        if isinstance(other, (int, Fraction, RatFunc)):
            c = Fraction(other) if isinstance(other, int) else other
            return HahnSeries.constant(c, self._zero_exponent())
        raise TypeError(f"cannot combine HahnSeries with {type(other).__name__}")

    def __add__(self, other):
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        prec = _min_prec(self.precision, o.precision)
        return HahnSeries(list(self.terms) + list(o.terms), prec)

    __radd__ = __add__

    def __neg__(self):
        return HahnSeries([(e, -c) for e, c in self.terms], self.precision)

    def __sub__(self, other):
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "HahnSeries":
        if not c:
            return HahnSeries.zero(self.precision)
        return HahnSeries([(e, k * c) for e, k in self.terms], self.precision)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, RatFunc)):
            return self.scale(other)
        if not isinstance(other, HahnSeries):
            return NotImplemented
        if self.is_zero() or other.is_zero():
            return HahnSeries.zero()
        prec = None
        if self.precision is not None:
            prec = other._order() + self.precision
        if other.precision is not None:
            prec = _min_prec(prec, self._order() + other.precision)
        products = []
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                e = e1 + e2
                if prec is None or e < prec:
                    products.append((e, c1 * c2))
        return HahnSeries(products, prec)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only non-negative integer powers are supported")
        result = HahnSeries.constant(Fraction(1), self._zero_exponent())
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def shift(self, exponent, coeff=1) -> "HahnSeries":
        """Multiply by the exact monomial ``coeff * t^exponent``."""
        prec = None if self.precision is None else self.precision + exponent
        return HahnSeries([(e + exponent, c * coeff) for e, c in self.terms], prec)

    def __eq__(self, other):
        if not isinstance(other, HahnSeries):
            return NotImplemented
        return self.precision == other.precision and self.terms == other.terms

    __hash__ = None

    def __repr__(self):
        body = " + ".join(f"({_encode_coeff(c)})*t^({e})" for e, c in self.terms) or "0"
        if self.precision is not None:
            body += f" + O(t^({self.precision}))"
        return f"HahnSeries[{body}]"

    # JSON -------------------------------------------------------------------

    def to_json(self):
        return {
            "precision": None if self.precision is None else encode_value(self.precision),
            "terms": [[encode_value(e), _encode_coeff(c)] for e, c in self.terms],
        }

    @classmethod
    def from_json(cls, obj, variables=None):
        prec = obj.get("precision")
        terms = []
        for e, c in obj["terms"]:
            if variables is not None and not _is_rat_text(c):
                coeff = _parse_ratfunc(c, variables)
            else:
                coeff = Fraction(c)
            terms.append((decode_value(e), coeff))
        return cls(terms, None if prec is None else decode_value(prec))


def _is_rat_text(text: str) -> bool:
    try:
        Fraction(text)
        return True
    except ValueError:
        return False


def _parse_ratfunc(text, variables):
    from .poly import parse_poly

    if text.startswith("(") and ")/(" in text:
        num, den = text[1:-1].split(")/(", 1)
        return RatFunc(parse_poly(num, variables), parse_poly(den, variables))
    return RatFunc(parse_poly(text, variables))


class _SortKey:
    """Sort key that orders exponents through their own ``<``."""

    __slots__ = ("v",)

    def __init__(self, v):
        self.v = v

    def __lt__(self, other):
        return self.v < other.v


# substitution -----------------------------------------------------------------

def subst_series(f: MPoly, assignment: Mapping[str, object]) -> HahnSeries:
    """Evaluate a polynomial at series (or coefficient constants).

    Raises :class:`PrecisionError` naming the monomial whose image limits
    the precision when the result has no known terms.
    """
    missing = [v for v in f.variables if v not in assignment]
    if missing:
        raise ValueError(f"unassigned variables: {missing}")
    images = []
    for v in f.variables:
        val = assignment[v]
        if isinstance(val, HahnSeries):
            images.append(val)
        else:
            images.append(None if val is None else val)
    zero_exp = Fraction(0)
    for val in images:
        if isinstance(val, HahnSeries):
            zero_exp = val._zero_exponent()
            break
    cache: dict = {}

    def power(i, k):
        key = (i, k)
        if key not in cache:
            base = images[i]
            if not isinstance(base, HahnSeries):
                base = HahnSeries.constant(base, zero_exp)
            cache[key] = base ** k
        return cache[key]

    total = HahnSeries.zero()
    limiting = None
    for e, c in f.sorted_terms():
        term = HahnSeries.constant(c, zero_exp)
        for i, k in enumerate(e):
            if k:
                term = term * power(i, k)
        if term.precision is not None and (limiting is None or term.precision < limiting[1]):
            limiting = (e, term.precision)
        total = total + term
    if not total.terms and total.precision is not None and not f.is_zero():
        mono = "*".join(f"{v}^{k}" for v, k in zip(f.variables, limiting[0]) if k) or "1"
        raise PrecisionError(
            f"precision collapsed to {total.precision}; limited by the term {mono}", total.precision
        )
    return total


# echelon by leading exponent ------------------------------------------------------

def echelon(series: Iterable[HahnSeries]):
    """Reduce to a basis with pairwise distinct leading exponents.

    Returns ``(basis, dropped)`` where ``basis`` is sorted by leading
    exponent (each normalised to leading coefficient 1) and ``dropped``
    counts inputs that reduced to the exact zero series.
    """
    basis: dict = {}
    dropped = 0
    for idx, s in enumerate(series):
        cur = s
        while True:
            if not cur.terms:
                if cur.precision is None:
                    dropped += 1
                    break
                raise PrecisionError(
                    f"input #{idx} lost all known terms below {cur.precision} during elimination",
                    cur.precision,
                )
            e, c = cur.terms[0]
            pivot = basis.get(e)
            if pivot is None:
                basis[e] = cur.scale(1 / c) if c != 1 else cur
                break
            cur = cur - pivot.scale(c)
    ordered = [basis[e] for e in sorted(basis, key=_SortKey)]
    return ordered, dropped
