"""Sparse multivariate polynomials over Q, rational functions, and a parser.

Polynomials are immutable.  Terms are stored as ``{exponent tuple: Fraction}``
with no zero coefficients; iteration follows graded lex order, largest term
first.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .order import as_rat, rat_str

DEFAULT_DEGREE_CAP = 4096


class DegreeCapError(OverflowError):
    """A result would exceed the configured total-degree cap."""


class PolyParseError(ValueError):
    def __init__(self, message: str, position: int, text: str = ""):
        super().__init__(f"{message} at position {position}")
        self.position = position
        self.text = text


class NotDivisibleError(ValueError):
    def __init__(self, message: str, term=None):
        super().__init__(message)
        self.term = term


def _grlex_key(exps):
    return (sum(exps), exps)


class MPoly:
    __slots__ = ("variables", "terms")

    degree_cap = DEFAULT_DEGREE_CAP

    def __init__(self, variables: Sequence[str], terms: Mapping | None = None):
        variables = tuple(variables)
        clean = {}
        if terms:
            n = len(variables)
            for exps, c in terms.items():
                exps = tuple(exps)
                if len(exps) != n:
                    raise ValueError(f"exponent {exps} does not match variables {variables}")
                if any(e < 0 for e in exps):
                    raise ValueError(f"negative exponent {exps}")
                c = as_rat(c)
                if c:
                    clean[exps] = c
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("MPoly is immutable")

    @classmethod
    def _raw(cls, variables, terms):
        p = object.__new__(cls)
        object.__setattr__(p, "variables", variables)
        object.__setattr__(p, "terms", terms)
        return p

    # constructors -----------------------------------------------------------

    @classmethod
    def zero(cls, variables):
        return cls._raw(tuple(variables), {})

    @classmethod
    def const(cls, variables, c):
        variables = tuple(variables)
        return cls(variables, {(0,) * len(variables): c})

    @classmethod
    def var(cls, variables, name):
        variables = tuple(variables)
        if name not in variables:
            raise ValueError(f"unknown variable {name!r}")
        exps = tuple(int(v == name) for v in variables)
        return cls._raw(variables, {exps: Fraction(1)})

    @classmethod
    def monomial(cls, variables, exps, c=1):
        return cls(variables, {tuple(exps): c})

    # basic queries ----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def total_degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def degree(self, var: str) -> int:
        i = self.variables.index(var)
        if not self.terms:
            return -1
        return max(e[i] for e in self.terms)

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: _grlex_key(t[0]), reverse=True)

    def coeff(self, exps) -> Fraction:
        return self.terms.get(tuple(exps), Fraction(0))

    def constant_term(self) -> Fraction:
        return self.coeff((0,) * len(self.variables))

    def content(self) -> Fraction:
        """Positive rational ``c`` with ``self / c`` primitive integral."""
        if not self.terms:
            return Fraction(0)
        num = 0
        den = 1
        for c in self.terms.values():
            num = math.gcd(num, c.numerator)
            den = den * c.denominator // math.gcd(den, c.denominator)
        return Fraction(num, den)

    # arithmetic -------------------------------------------------------------

    def _coerce(self, other) -> "MPoly":
        if isinstance(other, MPoly):
            if other.variables != self.variables:
                raise ValueError(f"variable mismatch: {self.variables} vs {other.variables}")
            return other
        return MPoly.const(self.variables, as_rat(other))

    def __add__(self, other):
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        terms = dict(self.terms)
        for e, c in o.terms.items():
            s = terms.get(e, 0) + c
            if s:
                terms[e] = s
            else:
                terms.pop(e, None)
        return MPoly._raw(self.variables, terms)

    __radd__ = __add__

    def __neg__(self):
        return MPoly._raw(self.variables, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        if not self.terms or not o.terms:
            return MPoly.zero(self.variables)
        if self.total_degree() + o.total_degree() > self.degree_cap:
            raise DegreeCapError(f"product degree exceeds cap {self.degree_cap}")
        terms: dict = {}
        get = terms.get
        for e1, c1 in self.terms.items():
            for e2, c2 in o.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                terms[e] = get(e, 0) + c1 * c2
        return MPoly._raw(self.variables, {e: c for e, c in terms.items() if c})

    __rmul__ = __mul__

    def scale(self, c) -> "MPoly":
        c = as_rat(c)
        if not c:
            return MPoly.zero(self.variables)
        return MPoly._raw(self.variables, {e: v * c for e, v in self.terms.items()})

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("exponent must be a natural number")
        if self.terms and self.total_degree() * n > self.degree_cap:
            raise DegreeCapError(f"power degree exceeds cap {self.degree_cap}")
        result = MPoly.const(self.variables, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, MPoly):
            return self.variables == other.variables and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self == MPoly.const(self.variables, other)
        return NotImplemented

    def __hash__(self):
        return hash((self.variables, frozenset(self.terms.items())))

    def monomial_shift(self, exps) -> "MPoly":
        """Multiply by the monomial with exponent vector ``exps``."""
        exps = tuple(exps)
        return MPoly._raw(
            self.variables,
            {tuple(a + b for a, b in zip(e, exps)): c for e, c in self.terms.items()},
        )

    def derivative(self, var: str, times: int = 1) -> "MPoly":
        i = self.variables.index(var)
        terms = {}
        for e, c in self.terms.items():
            k = e[i]
            if k < times:
                continue
            f = 1
            for j in range(times):
                f *= k - j
            ne = e[:i] + (k - times,) + e[i + 1:]
            terms[ne] = c * f
        return MPoly._raw(self.variables, terms)

    def evaluate(self, point: Mapping[str, object]):
        total = 0
        for e, c in self.terms.items():
            v = c
            for name, k in zip(self.variables, e):
                if k:
                    v = v * point[name] ** k
            total = total + v
        return total

    def with_variables(self, variables: Sequence[str]) -> "MPoly":
        """Re-embed into a polynomial ring on a superset of variables."""
        variables = tuple(variables)
        idx = []
        for v in self.variables:
            if v not in variables:
                raise ValueError(f"variable {v!r} missing from {variables}")
            idx.append(variables.index(v))
        terms = {}
        for e, c in self.terms.items():
            ne = [0] * len(variables)
            for k, j in zip(e, idx):
                ne[j] = k
            terms[tuple(ne)] = c
        return MPoly._raw(variables, terms)

    def subst(self, mapping: Mapping[str, object], target_vars: Sequence[str] | None = None):
        """Substitute polynomials (or other ring elements) for variables.

        Variables missing from ``mapping`` are kept, which requires them to
        exist in ``target_vars``.  Values may be any objects supporting ring
        arithmetic with rationals (MPoly, HahnSeries, RatFunc, Fraction).
        """
        if target_vars is None:
            target_vars = self.variables
        target_vars = tuple(target_vars)
        images = []
        for v in self.variables:
            if v in mapping:
                img = mapping[v]
                if isinstance(img, str):
                    img = parse_poly(img, target_vars)
                images.append(img)
            else:
                images.append(MPoly.var(target_vars, v))
        powers: list[dict] = [dict() for _ in images]

        def power(i, k):
            cache = powers[i]
            if k not in cache:
                if k == 1:
                    cache[k] = images[i]
                else:
                    half = power(i, k // 2)
                    sq = half * half
                    cache[k] = sq * images[i] if k % 2 else sq
            return cache[k]

        total = None
        for e, c in self.sorted_terms():
            term = None
            for i, k in enumerate(e):
                if k:
                    p = power(i, k)
                    term = p if term is None else term * p
            contrib = c if term is None else term * c
            total = contrib if total is None else total + contrib
        if total is None:
            return MPoly.zero(target_vars)
        if isinstance(total, Fraction):
            return MPoly.const(target_vars, total)
        return total

    def __repr__(self):
        return f"MPoly({format_poly(self)!r}, {list(self.variables)})"

    def __str__(self):
        return format_poly(self)


def format_poly(p: MPoly) -> str:
    """Canonical text form; ``parse_poly(format_poly(p), p.variables) == p``."""
    if not p.terms:
        return "0"
    parts = []
    for exps, c in p.sorted_terms():
        mono = "*".join(
            name if k == 1 else f"{name}^{k}" for name, k in zip(p.variables, exps) if k
        )
        mag = abs(c)
        if mono:
            body = mono if mag == 1 else f"{rat_str(mag)}*{mono}"
        else:
            body = rat_str(mag)
        sign = "-" if c < 0 else "+"
        parts.append((sign, body))
    first_sign, first = parts[0]
    out = ("-" if first_sign == "-" else "") + first
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


# parsing --------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\*\*|[-+*/^()]))")


def _tokenize(text: str):
    pos = 0
    tokens = []
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise PolyParseError(f"unexpected character {text[pos]!r}", pos, text)
        start = m.start(m.lastindex)
        if m.group(1) is not None:
            tokens.append(("num", int(m.group(1)), start))
        elif m.group(2) is not None:
            tokens.append(("name", m.group(2), start))
        else:
            op = m.group(3)
            tokens.append(("op", "^" if op == "**" else op, start))
        pos = m.end()
    tokens.append(("end", None, n))
    return tokens


class _Parser:
    def __init__(self, text, variables):
        self.text = text
        self.variables = tuple(variables)
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        raise PolyParseError(msg, tok[2], self.text)

    def expect_op(self, op):
        tok = self.take()
        if tok[0] != "op" or tok[1] != op:
            self.error(f"expected {op!r}", tok)

    def parse(self) -> MPoly:
        result = self.expr()
        if self.peek()[0] != "end":
            self.error("unexpected token")
        return result

    def expr(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] in "+-":
            self.take()
            left = self.term()
            if tok[1] == "-":
                left = -left
        else:
            left = self.term()
        while True:
            tok = self.peek()
            if tok[0] == "op" and tok[1] in "+-":
                self.take()
                right = self.term()
                left = left + right if tok[1] == "+" else left - right
            else:
                return left

    def term(self):
        left = self.factor()
        while self.peek()[0] == "op" and self.peek()[1] == "*":
            self.take()
            left = left * self.factor()
        return left

    def factor(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "-":
            self.take()
            return -self.factor()
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            exp_tok = self.take()
            if exp_tok[0] != "num":
                self.error("exponent must be a natural number", exp_tok)
            base = base ** exp_tok[1]
        return base

    def atom(self):
        tok = self.take()
        kind, val, _ = tok
        if kind == "num":
            value = Fraction(val)
            nxt = self.peek()
            if nxt[0] == "op" and nxt[1] == "/":
                self.take()
                den = self.take()
                if den[0] != "num":
                    self.error("rational literal needs an integer denominator", den)
                if den[1] == 0:
                    self.error("zero denominator", den)
                value = Fraction(val, den[1])
            return MPoly.const(self.variables, value)
        if kind == "name":
            if val not in self.variables:
                self.error(f"unknown variable {val!r}", tok)
            return MPoly.var(self.variables, val)
        if kind == "op" and val == "(":
            inner = self.expr()
            self.expect_op(")")
            return inner
        self.error("unexpected token", tok)


def parse_poly(text: str, variables: Sequence[str]) -> MPoly:
    """Parse ``text`` built from ``+ - * ^ ( )``, rationals and variable names."""
    return _Parser(text, variables).parse()


def x_power_divide(f: MPoly, i: int, x: str = "x", z: str = "z"):
    """Divide ``f`` in ``K[x, z]`` by ``x**i``.

    Returns ``(quotient, w_degree, z_degree)``.  ``z_degree`` is the plain
    degree in ``z``; ``w_degree`` is the least ``n`` such that the quotient is
    a combination ``a_0 + a_1 z + ... + a_n z^n`` with ``a_k`` polynomial in
    ``x`` and ``y = x*z`` (a term ``x^a z^b`` needs ``n >= b - a``).
    """
    xi = f.variables.index(x)
    zi = f.variables.index(z)
    terms = {}
    for e, c in f.terms.items():
        if e[xi] < i:
            raise NotDivisibleError(
                f"term {format_poly(MPoly(f.variables, {e: c}))} is not divisible by {x}^{i}",
                term=(e, c),
            )
        ne = list(e)
        ne[xi] -= i
        terms[tuple(ne)] = c
    q = MPoly._raw(f.variables, terms)
    w_degree = max((max(0, e[zi] - e[xi]) for e in terms), default=0)
    return q, w_degree, max(q.degree(z), 0)


class RatFunc:
    """Quotient ``num / den`` of polynomials over the same variables.

    Only content and common monomial factors are cancelled; equality is
    decided by cross-multiplication.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: MPoly, den: MPoly | None = None):
        if den is None:
            den = MPoly.const(num.variables, 1)
        if num.variables != den.variables:
            raise ValueError("numerator and denominator use different variables")
        if den.is_zero():
            raise ZeroDivisionError("RatFunc with zero denominator")
        num, den = _normalize(num, den)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __setattr__(self, name, value):
        raise AttributeError("RatFunc is immutable")

    @property
    def variables(self):
        return self.num.variables

    @classmethod
    def const(cls, variables, c):
        return cls(MPoly.const(variables, c))

    def _coerce(self, other) -> "RatFunc":
        if isinstance(other, RatFunc):
            return other
        if isinstance(other, MPoly):
            return RatFunc(other)
        return RatFunc(MPoly.const(self.variables, as_rat(other)))

    def is_zero(self):
        return self.num.is_zero()

    def __bool__(self):
        return not self.num.is_zero()

    def __add__(self, other):
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        if self.den == o.den:
            return RatFunc(self.num + o.num, self.den)
        return RatFunc(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(-self.num, self.den)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        return RatFunc(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o.is_zero():
            raise ZeroDivisionError("division by zero rational function")
        return RatFunc(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __pow__(self, n: int):
        if n < 0:
            return RatFunc(self.den ** (-n), self.num ** (-n))
        return RatFunc(self.num ** n, self.den ** n)

    def __eq__(self, other):
        try:
            o = self._coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.num * o.den == o.num * self.den

    __hash__ = None

    def __repr__(self):
        return f"RatFunc({format_poly(self.num)!r}, {format_poly(self.den)!r})"

    def __str__(self):
        if self.den == 1:
            return format_poly(self.num)
        return f"({format_poly(self.num)})/({format_poly(self.den)})"


def _normalize(num: MPoly, den: MPoly):
    if num.is_zero():
        return num, MPoly.const(num.variables, 1)
    n = len(num.variables)
    shift = [min(e[k] for e in list(num.terms) + list(den.terms)) for k in range(n)]
    if any(shift):
        neg = tuple(shift)
        num = MPoly._raw(num.variables, {tuple(a - b for a, b in zip(e, neg)): c for e, c in num.terms.items()})
        den = MPoly._raw(den.variables, {tuple(a - b for a, b in zip(e, neg)): c for e, c in den.terms.items()})
    lead = den.sorted_terms()[0][1]
    scale = den.content() * (1 if lead > 0 else -1)
    if scale != 1:
        num = num.scale(1 / scale)
        den = den.scale(1 / scale)
    return num, den
