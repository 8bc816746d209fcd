"""Exact scalars and ordered abelian groups.

Rationals are plain :class:`fractions.Fraction` values (ints are accepted
wherever a rational is expected).  :class:`QuadRat` models ``a + b*sqrt(2)``
and is used for the rank-one group ``Z + alpha*Z`` with ``alpha = sqrt(2)``.
:class:`GroupElem` is a lex-ordered tuple of such scalars.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import total_ordering
from numbers import Rational
from typing import Iterable, Sequence

RAT = "Q"
QUAD = "Q2"


class SignatureError(TypeError):
    """Two group elements with different coordinate kinds were combined."""


def as_rat(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rat(value)
    raise TypeError(f"not a rational: {value!r}")


def parse_rat(text: str) -> Fraction:
    text = text.strip()
    if not text:
        raise ValueError("empty rational literal")
    return Fraction(text)


def rat_str(q) -> str:
    q = as_rat(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def _sign(q: Fraction) -> int:
    return (q > 0) - (q < 0)


@total_ordering
class QuadRat:
    """The number ``a + b*sqrt(2)`` with rational ``a`` and ``b``."""

    __slots__ = ("a", "b")

    def __init__(self, a=0, b=0):
        object.__setattr__(self, "a", as_rat(a))
        object.__setattr__(self, "b", as_rat(b))

    def __setattr__(self, name, value):
        raise AttributeError("QuadRat is immutable")

    @staticmethod
    def coerce(value) -> "QuadRat":
        if isinstance(value, QuadRat):
            return value
        return QuadRat(as_rat(value), 0)

    def sign(self) -> int:
        sa, sb = _sign(self.a), _sign(self.b)
        if sb == 0:
            return sa
        if sa == 0 or sa == sb:
            return sb
        # opposite signs: compare a^2 with 2 b^2
        diff = self.a * self.a - 2 * self.b * self.b
        return sa * _sign(diff)

    def __add__(self, other):
        try:
            o = QuadRat.coerce(other)
        except TypeError:
            return NotImplemented
        return QuadRat(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self):
        return QuadRat(-self.a, -self.b)

    def __sub__(self, other):
        try:
            o = QuadRat.coerce(other)
        except TypeError:
            return NotImplemented
        return QuadRat(self.a - o.a, self.b - o.b)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        try:
            o = QuadRat.coerce(other)
        except TypeError:
            return NotImplemented
        return QuadRat(self.a * o.a + 2 * self.b * o.b, self.a * o.b + self.b * o.a)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = QuadRat.coerce(other)
        norm = o.a * o.a - 2 * o.b * o.b
        if norm == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt 2)")
        return self * QuadRat(o.a / norm, -o.b / norm)

    def __eq__(self, other):
        if isinstance(other, QuadRat):
            return self.a == other.a and self.b == other.b
        if isinstance(other, (int, Rational)):
            return self.b == 0 and self.a == other
        return NotImplemented

    def __lt__(self, other):
        try:
            o = QuadRat.coerce(other)
        except TypeError:
            return NotImplemented
        return (self - o).sign() < 0

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b))

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def __float__(self):
        return float(self.a) + float(self.b) * math.sqrt(2)

    def __repr__(self):
        return f"QuadRat({rat_str(self.a)}, {rat_str(self.b)})"

    def __str__(self):
        if self.b == 0:
            return rat_str(self.a)
        if self.a == 0:
            return f"{rat_str(self.b)}*alpha"
        return f"{rat_str(self.a)}+{rat_str(self.b)}*alpha"


ALPHA = QuadRat(0, 1)


def scalar_kind(value) -> str:
    if isinstance(value, QuadRat):
        return QUAD
    if isinstance(value, (int, Rational)) and not isinstance(value, bool):
        return RAT
    raise TypeError(f"unsupported scalar {value!r}")


def _normalize_scalar(value, kind: str):
    if kind == QUAD:
        return QuadRat.coerce(value)
    if isinstance(value, int):
        return value
    return as_rat(value)


@total_ordering
class GroupElem:
    """Element of a lex-ordered product of scalar groups.

    Coordinates are rationals (``int`` or ``Fraction``) or :class:`QuadRat`.
    The signature records the kind of each coordinate; arithmetic and
    comparison between elements of different signatures raise
    :class:`SignatureError`.
    """

    __slots__ = ("coords", "signature")

    def __init__(self, coords: Iterable, signature: Sequence[str] | None = None):
        coords = tuple(coords)
        if signature is None:
            signature = tuple(scalar_kind(c) for c in coords)
        else:
            signature = tuple(signature)
            if len(signature) != len(coords):
                raise SignatureError("signature length does not match coordinates")
            coords = tuple(_normalize_scalar(c, k) for c, k in zip(coords, signature))
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "signature", signature)

    def __setattr__(self, name, value):
        raise AttributeError("GroupElem is immutable")

    @classmethod
    def zero(cls, signature: Sequence[str]) -> "GroupElem":
        return cls([QuadRat() if k == QUAD else 0 for k in signature], signature)

    def _check(self, other: "GroupElem"):
        if not isinstance(other, GroupElem):
            raise SignatureError(f"cannot combine GroupElem with {type(other).__name__}")
        if other.signature != self.signature:
            raise SignatureError(f"signature mismatch: {self.signature} vs {other.signature}")

    def __len__(self):
        return len(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    def __iter__(self):
        return iter(self.coords)

    def __add__(self, other):
        self._check(other)
        return GroupElem(tuple(a + b for a, b in zip(self.coords, other.coords)), self.signature)

    def __sub__(self, other):
        self._check(other)
        return GroupElem(tuple(a - b for a, b in zip(self.coords, other.coords)), self.signature)

    def __neg__(self):
        return GroupElem(tuple(-a for a in self.coords), self.signature)

    def __mul__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        return GroupElem(tuple(k * a for a in self.coords), self.signature)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, GroupElem):
            return NotImplemented
        return self.signature == other.signature and self.coords == other.coords

    def __lt__(self, other):
        self._check(other)
        return self.coords < other.coords

    def __hash__(self):
        return hash(self.coords)

    def __bool__(self):
        return any(bool(c) for c in self.coords)

    def __repr__(self):
        return "GroupElem(" + ", ".join(str(c) for c in self.coords) + ")"


def lex_cmp(a: GroupElem, b: GroupElem) -> int:
    """Return -1, 0 or 1 as ``a`` is lex-smaller, equal or larger than ``b``."""
    a._check(b)
    for x, y in zip(a.coords, b.coords):
        if x < y:
            return -1
        if y < x:
            return 1
    return 0


class QSubgroup:
    """The cyclic subgroup ``generator * Z`` of the rationals."""

    __slots__ = ("generator",)

    def __init__(self, generator=0):
        g = abs(as_rat(generator))
        object.__setattr__(self, "generator", g)

    def __setattr__(self, name, value):
        raise AttributeError("QSubgroup is immutable")

    @property
    def trivial(self) -> bool:
        return self.generator == 0

    def __contains__(self, q) -> bool:
        q = as_rat(q)
        if self.trivial:
            return q == 0
        return (q / self.generator).denominator == 1

    def __le__(self, other: "QSubgroup") -> bool:
        return self.generator in other

    def __eq__(self, other):
        return isinstance(other, QSubgroup) and self.generator == other.generator

    def __hash__(self):
        return hash(self.generator)

    def __repr__(self):
        return f"QSubgroup({rat_str(self.generator)})"


def q_subgroup(gens: Iterable) -> QSubgroup:
    """Subgroup of Q generated by finitely many rationals.

    Every finitely generated subgroup of Q is cyclic; its generator is
    ``gcd(numerators) / lcm(denominators)`` once the inputs share a
    denominator.
    """
    gens = [as_rat(g) for g in gens]
    if not gens:
        raise ValueError("q_subgroup needs at least one generator")
    den = 1
    for g in gens:
        den = den * g.denominator // math.gcd(den, g.denominator)
    num = 0
    for g in gens:
        num = math.gcd(num, abs(g.numerator * (den // g.denominator)))
    return QSubgroup(Fraction(num, den))


def subgroup_index(small: QSubgroup, big: QSubgroup) -> int:
    if big.trivial:
        if small.trivial:
            return 1
        raise ValueError("nontrivial group is not contained in the trivial group")
    if small.trivial:
        raise ValueError("trivial subgroup has infinite index")
    ratio = small.generator / big.generator
    if ratio.denominator != 1:
        raise ValueError(f"{small} is not contained in {big}")
    return ratio.numerator


def two_adic_exponent(q) -> int:
    """Largest ``k`` with ``2**k`` dividing the reduced denominator of ``q``."""
    d = as_rat(q).denominator
    return (d & -d).bit_length() - 1


# JSON encodings -------------------------------------------------------------

def encode_scalar(value):
    if isinstance(value, QuadRat):
        return {"a": rat_str(value.a), "b": rat_str(value.b)}
    return rat_str(value)


def decode_scalar(obj):
    if isinstance(obj, dict):
        return QuadRat(parse_rat(obj["a"]), parse_rat(obj["b"]))
    if isinstance(obj, str):
        return parse_rat(obj)
    raise ValueError(f"cannot decode scalar from {obj!r}")


def encode_value(value):
    """Encode a rational, QuadRat or GroupElem for JSON."""
    if isinstance(value, GroupElem):
        return [encode_scalar(c) for c in value.coords]
    return encode_scalar(value)


def decode_value(obj):
    if isinstance(obj, list):
        return GroupElem([decode_scalar(c) for c in obj])
    return decode_scalar(obj)
