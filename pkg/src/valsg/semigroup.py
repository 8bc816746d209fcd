"""Well-ordered semigroups of rationals or lex-ordered tuples.

Values are either rationals (``int``/``Fraction``) or :class:`GroupElem`.
A bound is a value of the same kind; for tuples of length two or more the
bound is rectangular (every coordinate strictly below the bound's), since
lex balls are infinite.
"""

from __future__ import annotations

import ast
import heapq
import math
import operator
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .order import GroupElem, as_rat, encode_value, decode_value, q_subgroup, subgroup_index

DEFAULT_HORIZON = 256


class IncompleteTableError(RuntimeError):
    """An operation needed a complete enumeration but got a truncated one."""


class NoMultipleFound(LookupError):
    def __init__(self, gamma, bound):
        super().__init__(f"no multiple of {gamma} found below bound {bound}")
        self.gamma = gamma
        self.bound = bound


class NonMinimalGenerator(ValueError):
    def __init__(self, index: int, value):
        super().__init__(f"generator #{index + 1} ({value}) lies in the semigroup of the previous ones")
        self.index = index
        self.value = value


# value helpers ----------------------------------------------------------------

def _is_tuple(v) -> bool:
    return isinstance(v, GroupElem)


def within(value, bound) -> bool:
    if _is_tuple(bound):
        if len(bound) == 1:
            return value[0] < bound[0]
        return all(a < b for a, b in zip(value.coords, bound.coords))
    return value < bound


def past_first(value, bound) -> bool:
    """True when ``value`` is at or beyond ``bound`` in the first coordinate."""
    if _is_tuple(bound):
        return not value[0] < bound[0]
    return not value < bound


def zero_like(value):
    if _is_tuple(value):
        return GroupElem.zero(value.signature)
    return Fraction(0)


def _sort_key(v):
    return v.coords if _is_tuple(v) else v


def _halve(bound):
    if _is_tuple(bound):
        return GroupElem((bound[0] / 2,) + tuple(bound.coords[1:]), bound.signature)
    return as_rat(bound) / 2


# integer-rule mini language -----------------------------------------------------

_ALLOWED_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Pow: operator.pow,
    ast.BitXor: operator.pow,
    ast.FloorDiv: operator.floordiv,
}


def int_rule(expr: str) -> Callable[[int], int]:
    """Compile an integer sequence rule such as ``"2^i"`` or ``"i*i + 1"``."""
    tree = ast.parse(expr, mode="eval")

    def ev(node, i):
        if isinstance(node, ast.Expression):
            return ev(node.body, i)
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return node.value
        if isinstance(node, ast.Name) and node.id == "i":
            return i
        if isinstance(node, ast.BinOp) and type(node.op) in _ALLOWED_BINOPS:
            return _ALLOWED_BINOPS[type(node.op)](ev(node.left, i), ev(node.right, i))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
            return -ev(node.operand, i)
        raise ValueError(f"unsupported rule expression {expr!r}")

    ev(tree, 3)  # syntax check
    return lambda i: ev(tree, i)


# generator streams --------------------------------------------------------------

@dataclass(frozen=True)
class Rule:
    value: Callable | None = None  # (i, params) -> value
    start: int = 1
    limit: Callable | None = None  # params -> exact supremum, if any
    below: Callable | None = None  # (params, bound, horizon) -> (list, complete)


RULES: dict[str, Rule] = {}


def register_rule(name: str, rule: Rule):
    RULES[name] = rule


class GenStream:
    """Generators given as a finite list or by a named rule."""

    def __init__(self, gens: Iterable | None = None, rule: str | None = None, params: dict | None = None):
        if (gens is None) == (rule is None):
            raise ValueError("give exactly one of gens or rule")
        self.gens = None if gens is None else list(gens)
        self.rule = rule
        self.params = dict(params or {})
        if rule is not None:
            _load_builtin_rules()
            if rule not in RULES:
                raise ValueError(f"unknown generator rule {rule!r}")

    @classmethod
    def finite(cls, gens):
        return cls(gens=[g if isinstance(g, GroupElem) else as_rat(g) for g in gens])

    @classmethod
    def from_rule(cls, name, **params):
        return cls(rule=name, params=params)

    @property
    def kind(self):
        return "finite-list" if self.gens is not None else "rule"

    def value(self, i: int):
        if self.gens is not None:
            return self.gens[i]
        r = RULES[self.rule]
        if r.value is None:
            raise TypeError(f"rule {self.rule!r} is not indexed")
        return r.value(i, self.params)

    def limit(self):
        r = RULES.get(self.rule) if self.rule else None
        if r is None or r.limit is None:
            raise TypeError("stream has no declared limit")
        return r.limit(self.params)

    def take_below(self, bound, horizon: int = DEFAULT_HORIZON):
        """Generators inside ``bound`` and whether the list is known complete."""
        if self.gens is not None:
            return [g for g in self.gens if within(g, bound)], True
        r = RULES[self.rule]
        if r.below is not None:
            return r.below(self.params, bound, horizon)
        out = []
        for k in range(horizon):
            g = r.value(r.start + k, self.params)
            if past_first(g, bound):
                return out, True
            if within(g, bound):
                out.append(g)
        return out, False

    def to_json(self):
        if self.gens is not None:
            return {"gens": [encode_value(g) for g in self.gens]}
        return {"rule": self.rule, "params": self.params}

    @classmethod
    def from_json(cls, obj):
        if "gens" in obj:
            return cls(gens=[decode_value(g) for g in obj["gens"]])
        return cls(rule=obj["rule"], params=obj.get("params", {}))

    def __repr__(self):
        if self.gens is not None:
            return f"GenStream({self.gens})"
        return f"GenStream(rule={self.rule!r}, params={self.params})"


def _spq_values(params):
    p, q, depth = int(params["p"]), int(params["q"]), int(params["depth"])
    first = [1 - Fraction(1, p ** i) for i in range(1, depth + 1)]
    second = [2 - Fraction(1, q ** i) for i in range(1, depth + 1)]
    return first + second


def _one_minus_pow(i, params):
    return 1 - Fraction(1, int(params.get("p", 2)) ** i)


def _z2_value(i, params):
    from .composite import z2_gamma

    return z2_gamma(i, params.get("a_rule", "2^i"), params.get("b_rule", "i"))


_builtins_loaded = False


def _load_builtin_rules():
    global _builtins_loaded
    if _builtins_loaded:
        return
    _builtins_loaded = True
    from . import skp

    register_rule("dyadic-beta", Rule(value=lambda i, p: skp.dyadic_beta(i), start=0))
    register_rule(
        "spq",
        Rule(below=lambda params, bound, horizon: ([g for g in _spq_values(params) if within(g, bound)], True)),
    )
    register_rule("one-minus-pow", Rule(value=_one_minus_pow, start=1, limit=lambda p: Fraction(1)))
    register_rule("z2-example", Rule(value=_z2_value, start=1))
    register_rule("dyadic-module", Rule(below=skp.module_coset_generators))


# tables -------------------------------------------------------------------------

@dataclass
class SemiTable:
    """All semigroup elements inside ``bound`` with one witness each.

    A witness is a multiplicity vector over ``gens``.  ``complete`` is False
    when the generator stream could not be exhausted inside the bound.
    """

    elements: list
    witnesses: dict
    gens: list
    bound: object
    generator_horizon: int
    complete: bool = True
    _members: set = field(default=None, repr=False)

    def __post_init__(self):
        self._members = set(self.elements)

    @property
    def status(self) -> str:
        return "complete" if self.complete else "incomplete"

    def __contains__(self, value) -> bool:
        return value in self._members

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def witness(self, value):
        return self.witnesses[value]

    def evaluate(self, witness):
        total = zero_like(self.gens[0]) if self.gens else Fraction(0)
        for k, g in zip(witness, self.gens):
            if k:
                total = total + g * k
        return total

    def is_closed(self) -> bool:
        members = self._members
        for i, s in enumerate(self.elements):
            for t in self.elements[i:]:
                u = s + t
                if within(u, self.bound) and u not in members:
                    return False
        return True

    def to_json(self):
        return {
            "status": self.status,
            "bound": encode_value(self.bound),
            "generators": [encode_value(g) for g in self.gens],
            "generator_horizon": self.generator_horizon,
            "elements": [encode_value(e) for e in self.elements],
        }


def _as_stream(gens) -> GenStream:
    if isinstance(gens, GenStream):
        return gens
    return GenStream.finite(gens)


def enumerate_below(gens, bound, horizon: int = DEFAULT_HORIZON) -> SemiTable:
    """Enumerate the semigroup generated by ``gens`` inside ``bound``.

    Frontier expansion from 0 in increasing order; every element inside a
    rectangular bound is reachable through partial sums that stay inside it
    (add the generators with a negative trailing coordinate first).
    """
    stream = _as_stream(gens)
    if not _is_tuple(bound):
        bound = as_rat(bound)
    gen_list, complete = stream.take_below(bound, horizon)
    for g in gen_list:
        if not zero_like(g) < g:
            raise ValueError(f"generator {g} is not positive")
    zero = zero_like(gen_list[0]) if gen_list else (zero_like(bound))
    k = len(gen_list)
    witnesses = {zero: (0,) * k}
    heap = [(_sort_key(zero), 0, zero)]
    counter = 1
    elements = []
    while heap:
        _, _, e = heapq.heappop(heap)
        elements.append(e)
        w = witnesses[e]
        for j, g in enumerate(gen_list):
            s = e + g
            if s in witnesses or not within(s, bound):
                continue
            witnesses[s] = w[:j] + (w[j] + 1,) + w[j + 1:]
            heapq.heappush(heap, (_sort_key(s), counter, s))
            counter += 1
    if not within(zero, bound):
        elements, witnesses = [], {}
    horizon_used = len(gen_list) if stream.gens is not None else horizon
    return SemiTable(elements, witnesses, gen_list, bound, horizon_used, complete)


def minimal_generators(table: SemiTable) -> list:
    """Elements of the table that are not a sum of two nonzero elements."""
    if not table.complete:
        raise IncompleteTableError("minimal generators need a complete table")
    zero = zero_like(table.bound) if not table.gens else zero_like(table.gens[0])
    members = table._members
    found = []
    candidates = sorted(set(table.gens), key=_sort_key)
    for g in candidates:
        if g not in members:
            continue
        decomposable = any(
            (g - s) in members and (g - s) != zero for s in table.elements if s != zero and s < g
        )
        if not decomposable:
            found.append(g)
    return found


# s_i and the plane branch criterion ----------------------------------------------

def _is_rational(v) -> bool:
    return not _is_tuple(v) and not hasattr(v, "sign")


def s_value_table(prefix, gamma):
    """Least ``s >= 1`` with ``s*gamma`` in the semigroup, plus a table holding it.

    For rational semigroups the search is bounded by scaling to a numerical
    semigroup (gcd 1 after dividing by the group generator ``c``): every
    integer ``>= a_min * a_max`` lies in it.  Otherwise only multiples inside
    the table bound are examined and :class:`NoMultipleFound` is raised.
    """
    table = prefix if isinstance(prefix, SemiTable) else enumerate_below(prefix, _default_prefix_bound(prefix, gamma))
    gens = [g for g in table.gens]
    if not table.complete:
        raise IncompleteTableError("s_value needs a complete prefix table")
    if gens and all(_is_rational(g) for g in gens) and _is_rational(gamma):
        gamma = as_rat(gamma)
        if gamma <= 0:
            raise ValueError("gamma must be positive")
        c = q_subgroup(gens).generator
        scaled = sorted((g / c).numerator for g in gens)
        certificate = scaled[0] * scaled[-1]
        s_max = 1
        while True:
            v = s_max * gamma / c
            if v.denominator == 1 and v.numerator >= certificate:
                break
            s_max += 1
        need = s_max * gamma + c
        if not within(s_max * gamma, table.bound):
            table = enumerate_below(gens, need)
        for s in range(1, s_max + 1):
            if s * gamma in table:
                return s, table
        raise AssertionError("finite-complement certificate failed")  # pragma: no cover
    s = 1
    while True:
        v = gamma * s
        if not within(v, table.bound):
            raise NoMultipleFound(gamma, table.bound)
        if v in table:
            return s, table
        s += 1


def _default_prefix_bound(gens, gamma):
    gens = list(gens.gens if isinstance(gens, GenStream) else gens)
    if all(_is_rational(g) for g in gens):
        return max(as_rat(g) for g in gens) + as_rat(gamma) + 1
    raise ValueError("non-rational prefix needs an explicit SemiTable")


def s_value(prefix, gamma) -> int:
    return s_value_table(prefix, gamma)[0]


@dataclass
class PlaneBranchReport:
    generators: list
    per_index: list
    verdict: bool

    def to_json(self):
        return {
            "generators": [encode_value(g) for g in self.generators],
            "per_index": self.per_index,
            "verdict": self.verdict,
        }


def plane_branch_check(gens: Sequence) -> PlaneBranchReport:
    """Check ``s_i = n_i`` and ``gamma_i > s_{i-1} gamma_{i-1}`` along the list.

    The growth inequality needs ``s_{i-1}``, which exists only from ``i = 3``
    on; at ``i = 2`` it is reported as not applicable (``None``).
    """
    gens = [as_rat(g) for g in gens]
    if len(gens) < 2:
        raise ValueError("plane branch criterion needs at least two generators")
    if any(g <= 0 for g in gens):
        raise ValueError("generators must be positive")
    if any(b <= a for a, b in zip(gens, gens[1:])):
        raise ValueError("generators must be listed in strictly increasing order")
    per_index = []
    s_prev = None
    verdict = True
    for i in range(1, len(gens)):
        gamma = gens[i]
        prefix = enumerate_below(gens[:i], gamma + 1)
        if gamma in prefix:
            raise NonMinimalGenerator(i, gamma)
        g_prev = q_subgroup(gens[:i])
        g_cur = q_subgroup(gens[: i + 1])
        n = subgroup_index(g_prev, g_cur)
        s = s_value(prefix, gamma)
        growth = None if s_prev is None else gamma > s_prev * gens[i - 1]
        ok = s == n and growth is not False
        verdict = verdict and ok
        per_index.append(
            {
                "index": i + 1,
                "gamma": encode_value(gamma),
                "n": n,
                "s": s,
                "s_equals_n": s == n,
                "growth": growth,
                "growth_rhs": None if s_prev is None else encode_value(s_prev * gens[i - 1]),
            }
        )
        s_prev = s
    return PlaneBranchReport(gens, per_index, verdict)


# modules --------------------------------------------------------------------------

@dataclass
class SemiModule:
    """``{coset generator + base element}`` over the base semigroup."""

    base: GenStream
    coset_gens: GenStream


@dataclass
class ProbeReport:
    module_min_generators_below_bound: list
    saturated: bool
    bound: object
    elements: list
    semantics: str = (
        "semidecision: lists module generators found below the bound; "
        "'saturated' only means no new generator appeared in the top half "
        "and is evidence, not a proof of finite generation"
    )

    def to_json(self):
        return {
            "bound": encode_value(self.bound),
            "module_min_generators_below_bound": [encode_value(g) for g in self.module_min_generators_below_bound],
            "saturated": self.saturated,
            "semantics": self.semantics,
        }


def module_elements(module: SemiModule, bound, horizon: int = DEFAULT_HORIZON):
    base = enumerate_below(module.base, bound, horizon)
    cosets, complete = module.coset_gens.take_below(bound, horizon)
    if not base.complete or not complete:
        raise IncompleteTableError("module enumeration incomplete inside bound")
    out = set()
    for c in cosets:
        for b in base.elements:
            v = c + b
            if within(v, bound):
                out.add(v)
    return sorted(out, key=_sort_key), base


def module_fin_gen_probe(module: SemiModule, bound, horizon: int = DEFAULT_HORIZON) -> ProbeReport:
    if not _is_tuple(bound):
        bound = as_rat(bound)
    elements, base = module_elements(module, bound, horizon)
    base_set = set(base.elements)
    gens = []
    for m in elements:
        if not any((m - g) in base_set for g in gens):
            gens.append(m)
    half = _halve(bound)
    saturated = not any(not g < half for g in gens)
    return ProbeReport(gens, saturated, bound, elements)


# S_{p,q} and accumulation ------------------------------------------------------------

def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    for d in range(2, math.isqrt(n) + 1):
        if n % d == 0:
            return False
    return True


def spq_build(p: int, q: int, depth: int, bound) -> SemiTable:
    """Semigroup generated by ``1 - p^-i`` and ``2 - q^-i`` for ``i <= depth``."""
    if p == q or not (_is_prime(p) and _is_prime(q)):
        raise ValueError("p and q must be distinct primes")
    if depth < 1:
        raise ValueError("depth must be positive")
    return enumerate_below(GenStream.from_rule("spq", p=p, q=q, depth=depth), bound)


@dataclass
class ScanReport:
    min_gap: object
    cluster_points: list
    k: int
    threshold: object

    def to_json(self):
        return {
            "min_gap": None if self.min_gap is None else encode_value(self.min_gap),
            "cluster_points": [encode_value(c) for c in self.cluster_points],
            "config": {"k": self.k, "threshold": encode_value(self.threshold)},
        }


def _scan_line(values, threshold, k):
    gaps = [b - a for a, b in zip(values, values[1:])]
    min_gap = min(gaps) if gaps else None
    points = []
    run_start = None
    for idx, gap in enumerate(gaps + [None]):
        small = gap is not None and gap < threshold
        if small and run_start is None:
            run_start = idx
        elif not small and run_start is not None:
            if idx - run_start >= k:
                points.append((values[run_start] + values[idx]) / 2)
            run_start = None
    return min_gap, points


def accumulation_scan(table: SemiTable, threshold, k: int = 5) -> ScanReport:
    """Smallest gap and midpoints of runs of ``>= k`` consecutive gaps below ``threshold``.

    Tuple-valued tables are scanned fiber by fiber along the last coordinate.
    """
    if not table.complete:
        raise IncompleteTableError("accumulation scan needs a complete table")
    threshold = as_rat(threshold)
    elems = table.elements
    if len(elems) < 2:
        return ScanReport(None, [], k, threshold)
    if not _is_tuple(elems[0]):
        gap, pts = _scan_line(elems, threshold, k)
        return ScanReport(gap, pts, k, threshold)
    fibers: dict = {}
    for e in elems:
        fibers.setdefault(e.coords[:-1], []).append(e.coords[-1])
    min_gap = None
    points = []
    sig = elems[0].signature
    for prefix in sorted(fibers):
        gap, pts = _scan_line(sorted(fibers[prefix]), threshold, k)
        if gap is not None and (min_gap is None or gap < min_gap):
            min_gap = gap
        points.extend(GroupElem(prefix + (p,), sig) for p in pts)
    return ScanReport(min_gap, points, k, threshold)


# omega^m embedding ---------------------------------------------------------------

@dataclass
class OmegaEmbedding:
    m: int
    grid: int
    values: dict  # grid point -> value
    indices: dict  # grid point -> sequence indices summed
    sigma: dict  # prefix tuple -> sigma index

    def to_json(self):
        return {
            "m": self.m,
            "grid": self.grid,
            "points": [
                {"a": list(a), "value": encode_value(self.values[a]), "indices": self.indices[a]}
                for a in sorted(self.values)
            ],
        }


def omega_embedding(lam: GenStream, m: int, grid: int, cap: int = 10_000) -> OmegaEmbedding:
    """Order-embed ``{0..grid}^m`` (lex) into m-fold sums of an increasing sequence.

    ``lam`` must be indexed from 0 and declare its limit.  Each sigma is the
    least index satisfying the defining strict inequality.
    """
    if m < 1:
        raise ValueError("m must be positive")
    limit = lam.limit()
    cache_val: dict = {}

    def lv(i):
        if i not in cache_val:
            cache_val[i] = lam.value(i)
        return cache_val[i]

    sigma: dict = {}

    def least_index(base):
        lhs = lv(base) + limit
        head = lv(base + 1)
        for s in range(cap):
            if lhs < head + lv(s):
                return s
        raise RuntimeError(f"no sigma index below cap {cap}")

    def sig(prefix):
        if prefix not in sigma:
            if len(prefix) == 1:
                base = prefix[0]
            else:
                base = sig(prefix[:-1]) + prefix[-1]
            sigma[prefix] = least_index(base)
        return sigma[prefix]

    values = {}
    indices = {}
    points = [()]
    for _ in range(m):
        points = [p + (a,) for p in points for a in range(grid + 1)]
    for a in points:
        idx = [a[0] + 1]
        for i in range(1, m):
            idx.append(sig(a[:i]) + a[i] + 1)
        total = Fraction(0)
        for j in idx:
            total += lv(j)
        values[a] = total
        indices[a] = idx
    return OmegaEmbedding(m, grid, values, indices, sigma)
