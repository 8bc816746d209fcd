"""Building a series ``z = lim z_i`` that is transcendental over ``K(x, y)``.

Values are those of the dyadic valuation ``nu_bar`` on ``K[x^-1, x, y]``
(:mod:`valsg.skp`).  Each step adds ``h_i = f_i / g_i`` with ``g_i`` a power
of ``x``, so every ``z_i`` is an exact :class:`SKPElem`.  The value set of a finite-dimensional span
is read off an echelon form of the graded images, which is exact because
the graded image is linear and preserves values.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

from .hahn import HahnSeries, PrecisionError, echelon
from .order import rat_str, two_adic_exponent
from .poly import MPoly, format_poly
from .skp import (
    XY,
    SKPElem,
    _max_index_below,
    dyadic_beta,
    key_polynomial,
    mask_indices,
    monomial_label,
    monomial_value,
)

XYZ = ("x", "y", "z")
DEFAULT_HORIZON = 40


class HorizonError(ValueError):
    """A target value needs key polynomials beyond the allowed index."""


# value spectra -------------------------------------------------------------------

@dataclass
class SpectrumReport:
    dimension: int
    values: list
    echelon_basis: list

    def to_json(self):
        return {"dimension": self.dimension, "values": [rat_str(v) for v in self.values]}


def value_spectrum(generators) -> SpectrumReport:
    """Attained values of the span of ``generators`` (HahnSeries)."""
    basis, _ = echelon(generators)
    values = [s.terms[0][0] for s in basis]
    return SpectrumReport(len(basis), values, basis)


# evaluating f(z) --------------------------------------------------------------------

class _Evaluator:
    """Evaluates polynomials in ``x, y, z`` at ``z = w`` inside the SKP algebra.

    With ``cap`` set, images are truncated at value ``cap``.
    """

    def __init__(self, w: SKPElem, cap=None):
        self.w = w
        self.cap = cap
        self._w_pow = {0: SKPElem.const(1)}
        self._y_pow = {0: SKPElem.const(1)}

    def w_pow(self, k):
        if k not in self._w_pow:
            self._w_pow[k] = self.w_pow(k - 1).mul(self.w, self.cap)
        return self._w_pow[k]

    def y_pow(self, k):
        if k not in self._y_pow:
            self._y_pow[k] = SKPElem.from_poly(MPoly.monomial(XY, (0, k)))
        return self._y_pow[k]

    def monomial(self, a, b, c) -> SKPElem:
        cap = None if self.cap is None else self.cap - a
        return self.y_pow(b).mul(self.w_pow(c), cap).shift_x(a)

    def __call__(self, f: MPoly) -> SKPElem:
        ix, iy, iz = (f.variables.index(v) for v in XYZ)
        total = SKPElem()
        for e, coeff in f.terms.items():
            total = total + self.monomial(e[ix], e[iy], e[iz]).scale(coeff)
        return total


def d_basis(n: int) -> list:
    """Exponents ``(a, b, c)`` of ``x^a y^b z^c`` with ``a + b + c <= n``."""
    return [(a, b, t - a - b) for t in range(n + 1) for a in range(t + 1) for b in range(t + 1 - a)]


def d_spectrum(n: int, w: SKPElem, start=Fraction(16)) -> SpectrumReport:
    """Value set of ``D_n`` at ``z = w``.

    Images are truncated at a working precision that doubles whenever an
    elimination runs out of known terms, so the returned values are exact.
    """
    cap = Fraction(start)
    while True:
        ev = _Evaluator(w, cap)
        images = []
        for a, b, c in d_basis(n):
            img = ev.monomial(a, b, c)
            if not img.is_zero():
                images.append(img.graded_image())
        try:
            return value_spectrum(images)
        except PrecisionError:
            cap *= 2


# realizing a value as f / g --------------------------------------------------------

def realize_value(target, horizon: int = DEFAULT_HORIZON):
    """``(f, g)`` products of key polynomials with ``nu_bar(f) - nu_bar(g) = target``.

    Peels ``beta_k`` off by the 2-adic denominator (``beta_k`` has
    denominator exactly ``2^k``); the integer remainder goes to ``x``.
    Returns ``(l0, mask, m)``: ``f = x^l0 * prod P_j`` over ``mask``, ``g = x^m``.
    """
    rest = Fraction(target)
    mask = 0
    while rest.denominator != 1:
        k = two_adic_exponent(rest)
        if rest.denominator != 2 ** k:
            raise HorizonError(f"{target} is not a dyadic rational")
        if k > horizon:
            raise HorizonError(f"{target} needs P_{k}; raise the horizon above {horizon}")
        mask |= 1 << (k - 1)
        rest -= dyadic_beta(k)
    r = int(rest)
    return (r, mask, 0) if r >= 0 else (0, mask, -r)


def realized_polys(l0: int, mask: int, m: int):
    f = MPoly.monomial(XY, (l0, 0))
    for j in mask_indices(mask):
        f = f * key_polynomial(j)
    return f, MPoly.monomial(XY, (m, 0))


# the construction -------------------------------------------------------------------

@dataclass
class Step:
    i: int
    tau: Fraction
    lam: Fraction
    alpha: Fraction
    g_shift: int  # nu_bar(g_1 ... g_{i-1})
    f: tuple  # (l0, mask)
    g: int  # g_i = x^g
    denominator_exponent: int
    certificate_kind: str

    @property
    def h(self) -> SKPElem:
        l0, mask = self.f
        return SKPElem.monomial(l0 - self.g, mask)

    def lower_bound(self, prev_lam):
        base = self.tau + self.g_shift
        return base if prev_lam is None else max(prev_lam + self.g_shift, base)

    def to_json(self):
        l0, mask = self.f
        return {
            "i": self.i,
            "tau": rat_str(self.tau),
            "lambda": rat_str(self.lam),
            "alpha": rat_str(self.alpha),
            "nu_g_prefix": self.g_shift,
            "f": monomial_label(l0, mask),
            "g": monomial_label(self.g, 0),
            "denominator_exponent": self.denominator_exponent,
            "certificate_kind": self.certificate_kind,
        }


@dataclass
class TranscendState:
    steps: list = field(default_factory=list)
    z: SKPElem = field(default_factory=SKPElem)
    denominator_horizon: int = 0
    precision: Fraction | None = None

    @property
    def i(self) -> int:
        return len(self.steps)

    def z_at(self, i: int) -> SKPElem:
        total = SKPElem()
        for s in self.steps[:i]:
            total = total + s.h
        return total

    def z_series(self, i: int | None = None) -> HahnSeries:
        z = self.z if i is None else self.z_at(i)
        s = z.graded_image()
        return s if self.precision is None else s.truncate(self.precision)

    def check_invariants(self) -> list:
        problems = []
        prev = None
        for s in self.steps:
            if not s.alpha > s.tau:
                problems.append(f"step {s.i}: alpha {s.alpha} <= tau {s.tau}")
            if not s.lam > s.lower_bound(prev):
                problems.append(f"step {s.i}: lambda {s.lam} violates the max-inequality")
            if s.lam != s.alpha + s.g_shift:
                problems.append(f"step {s.i}: lambda != alpha + nu(g prefix)")
            if s.h.nu() != s.alpha:
                problems.append(f"step {s.i}: nu(f/g) != alpha")
            prev = s.lam
        return problems

    def to_json(self):
        return {
            "depth": self.i,
            "steps": [s.to_json() for s in self.steps],
            "denominator_horizon": self.denominator_horizon,
            "precision": None if self.precision is None else rat_str(self.precision),
            "z": self.z_series().to_json(),
            "z_terms": [monomial_label(*k) for k in sorted(self.z.terms, key=lambda k: monomial_value(*k))],
            "invariant_problems": self.check_invariants(),
        }


def tau(n: int, state: TranscendState) -> Fraction:
    """Largest value of ``f(z_{n-1})`` over nonzero ``f`` in ``D_n``."""
    return d_spectrum(n, state.z_at(n - 1)).values[-1]


def choose_lambda(state: TranscendState, i: int, tau_i: Fraction, spectrum_values) -> tuple:
    """``(lambda_i, h, certificate_kind)``.

    ``lambda_i = L + 1 + 2^-(h+1)`` where ``L`` is the max-inequality bound
    and ``2^-h`` the finest denominator among the value-semigroup of
    ``K[x, y]`` below ``L + 2``, the spectrum, and earlier choices.  So no
    value seen so far has ``lambda_i``'s denominator.  At ``i = 1`` this is a
    complete non-membership proof below ``L + 2``; later it only covers the
    enumerated values.
    """
    g_shift = sum(s.g for s in state.steps[: i - 1])
    prev = state.steps[i - 2].lam if i >= 2 else None
    bound = tau_i + g_shift if prev is None else max(prev + g_shift, tau_i + g_shift)
    h = _max_index_below(bound + 2)
    for v in spectrum_values:
        h = max(h, two_adic_exponent(v))
    for s in state.steps:
        h = max(h, two_adic_exponent(s.lam), two_adic_exponent(s.alpha))
    lam = bound + 1 + Fraction(1, 2 ** (h + 1))
    return lam, h + 1, "exact" if i == 1 else "heuristic"


def transcend_step(state: TranscendState, horizon: int = DEFAULT_HORIZON) -> Step:
    i = state.i + 1
    spectrum = d_spectrum(i, state.z)
    tau_i = spectrum.values[-1]
    lam, k, kind = choose_lambda(state, i, tau_i, spectrum.values)
    g_shift = sum(s.g for s in state.steps)
    alpha = lam - g_shift
    l0, mask, m = realize_value(alpha, horizon)
    step = Step(i, tau_i, lam, alpha, g_shift, (l0, mask), m, k, kind)
    state.steps.append(step)
    state.z = state.z + step.h
    state.denominator_horizon = max(state.denominator_horizon, k)
    return step


def transcend_build(depth: int, precision=None, horizon: int = DEFAULT_HORIZON) -> TranscendState:
    """Run ``depth`` steps.  ``precision`` only truncates the reported series;
    every choice is computed exactly and does not depend on it."""
    if depth < 1:
        raise ValueError("depth must be at least 1")
    state = TranscendState(precision=None if precision is None else Fraction(precision))
    for _ in range(depth):
        transcend_step(state, horizon)
    return state


def difference_values(state: TranscendState) -> dict:
    """``nu(z_j - z_i)`` for all ``0 <= i < j <= depth``."""
    out = {}
    for j in range(1, state.i + 1):
        zj = state.z_at(j)
        for i in range(j):
            out[(i, j)] = (zj - state.z_at(i)).nu()
    return out


def state_json(state: TranscendState) -> str:
    return json.dumps(state.to_json(), sort_keys=True, separators=(",", ":"))


# perturbation spot check ------------------------------------------------------------

@dataclass
class SpotCheckReport:
    n: int
    trials: int
    nonzero: int
    distinct_terms: int
    value_is_min: int
    failures: list

    @property
    def ok(self) -> bool:
        return not self.failures and self.nonzero == self.trials

    def to_json(self):
        return {
            "n": self.n,
            "trials": self.trials,
            "nonzero": self.nonzero,
            "distinct_term_values": self.distinct_terms,
            "value_is_min_term": self.value_is_min,
            "failures": self.failures,
            "ok": self.ok,
        }


def random_d_element(n: int, rng: random.Random, coeff_range: int = 5) -> MPoly:
    """Random nonzero ``f`` in ``D_n`` with at least one ``z`` term."""
    basis = d_basis(n)
    while True:
        terms = {}
        for a, b, c in basis:
            if rng.random() < 0.5:
                k = rng.randint(-coeff_range, coeff_range)
                if k:
                    terms[(a, b, c)] = Fraction(k)
        f = MPoly(XYZ, terms)
        if f.degree("z") >= 1:
            return f


def _taylor_values(f: MPoly, ev_w: _Evaluator, ev_z: _Evaluator, hn: SKPElem, cap):
    """``(nu(f(z_n)), [nu(h^k d_k(w))])`` or ``None`` when ``f(z_n) = 0`` exactly."""
    value = ev_z(f)
    if value.is_zero():
        return None
    v = value.nu()
    term_values = []
    h_pow = SKPElem.const(1)
    for k in range(f.degree("z") + 1):
        d_k = f.derivative("z", k).scale(Fraction(1, factorial(k))) if k else f
        dw = ev_w(d_k)
        if not dw.is_zero():
            term_values.append(h_pow.mul(dw, cap).nu())
        h_pow = h_pow.mul(hn, cap)
    return v, term_values


def perturbation_spotcheck(state: TranscendState, n: int, trials: int, seed: int = 0, max_cap=Fraction(2) ** 24) -> SpotCheckReport:
    """Random ``f`` in ``D_n``: ``f(w + h) != 0`` for ``w = z_{n-1}``, ``h = h_n``.

    Also checks the terms ``h^i d_i(w)`` of the Taylor expansion, with
    ``d_i = (1/i!) d^i f / dz^i``, have pairwise distinct values and that
    ``nu(f(w + h))`` is their minimum.  Evaluation is truncated at a working
    precision that doubles until every needed value is determined.
    """
    if state.i < n:
        raise ValueError(f"state has {state.i} steps; need at least {n}")
    rng = random.Random(seed)
    w = state.z_at(n - 1)
    zn = state.z_at(n)
    hn = state.steps[n - 1].h
    evaluators = {}
    nonzero = distinct = is_min = 0
    failures = []
    for t in range(trials):
        f = random_d_element(n, rng)
        cap = Fraction(64)
        while True:
            if cap not in evaluators:
                evaluators[cap] = (_Evaluator(w, cap), _Evaluator(zn, cap))
            try:
                result = _taylor_values(f, *evaluators[cap], hn, cap)
                break
            except PrecisionError:
                cap *= 2
                if cap > max_cap:
                    result = "undetermined"
                    break
        if result is None or result == "undetermined":
            problem = "f(z_n) = 0" if result is None else f"value not determined below {max_cap}"
            failures.append({"trial": t, "f": format_poly(f), "problem": problem})
            continue
        nonzero += 1
        value, term_values = result
        if len(set(term_values)) == len(term_values):
            distinct += 1
        else:
            failures.append({"trial": t, "f": format_poly(f), "problem": "Taylor terms share a value"})
        if term_values and value == min(term_values):
            is_min += 1
        else:
            failures.append({"trial": t, "f": format_poly(f), "problem": "value is not the minimal term"})
    return SpotCheckReport(n, trials, nonzero, distinct, is_min, failures)
