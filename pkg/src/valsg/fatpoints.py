"""Plane forms vanishing to order ``n`` at ``r`` general points.

``dim(d, n)`` is the vector-space dimension of degree-``d`` forms in
``x0, x1, x2`` whose partial derivatives of every order ``< n`` vanish at
each point.  General position is simulated by pseudo-random points.
"""

from __future__ import annotations

import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import comb

from .linalg import MERSENNE_31, rank_mod_p, rank_q

RATIONAL = "q"


def parse_field(text: str | None):
    """``"q"`` for Q or ``"p:<prime>"``; returns ``"q"`` or the prime."""
    if text is None or text == "":
        return MERSENNE_31
    if text == RATIONAL:
        return RATIONAL
    if text.startswith("p:"):
        p = int(text[2:])
        if p < 2 or any(p % k == 0 for k in range(2, min(p, 1 << 16)) if k * k <= p):
            raise ValueError(f"{p} is not prime")
        return p
    raise ValueError(f"unknown field {text!r}; use 'q' or 'p:<prime>'")


def field_label(field) -> str:
    return RATIONAL if field == RATIONAL else f"p:{field}"


@dataclass(frozen=True)
class PointSet:
    points: tuple
    seed: int
    field: object

    @property
    def r(self) -> int:
        return len(self.points)

    def to_json(self):
        return {"r": self.r, "seed": self.seed, "field": field_label(self.field), "points": [list(p) for p in self.points]}


def _proportional(a, b, field) -> bool:
    cross = (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])
    if field == RATIONAL:
        return not any(cross)
    return not any(c % field for c in cross)


def random_points(r: int, seed: int = 0, field=MERSENNE_31) -> PointSet:
    """``r`` pairwise distinct projective points, deterministic in ``seed``.

    Coordinates are drawn from ``[0, 2^31 - 1)`` (or ``[0, p)``), so Q and
    the default prime field see the same integer points.
    """
    if r < 1:
        raise ValueError("need at least one point")
    top = MERSENNE_31 if field == RATIONAL else field
    if field != RATIONAL and field * field + field + 1 < r:
        raise ValueError(f"the plane over F_{field} has fewer than {r} points")
    rng = random.Random(seed)
    pts = []
    attempts = 0
    while len(pts) < r:
        attempts += 1
        if attempts > 100 * r + 1000:
            raise ValueError("could not draw distinct points; field too small")
        cand = tuple(rng.randrange(top) for _ in range(3))
        if not any(cand) or any(_proportional(cand, q, field) for q in pts):
            continue
        pts.append(cand)
    return PointSet(tuple(pts), seed, field)


def monomials(d: int) -> list:
    return [(d - i - j, i, j) for i in range(d + 1) for j in range(d + 1 - i)]


def _falling(e: int, k: int) -> int:
    out = 1
    for t in range(k):
        out *= e - t
    return out


def condition_rows(d: int, n: int, pointset: PointSet) -> list:
    """One row per point and per derivative multi-index of order ``< n``."""
    mons = monomials(d)
    field = pointset.field
    derivs = [(k - i - j, i, j) for k in range(n) for i in range(k + 1) for j in range(k + 1 - i)]
    rows = []
    for pt in pointset.points:
        for kv in derivs:
            row = []
            for e in mons:
                if any(ei < ki for ei, ki in zip(e, kv)):
                    row.append(0)
                    continue
                c = 1
                for ei, ki, a in zip(e, kv, pt):
                    c *= _falling(ei, ki)
                    if field == RATIONAL:
                        c *= a ** (ei - ki)
                    else:
                        c = c * pow(a, ei - ki, field) % field
                row.append(c)
            rows.append(row)
    return rows


@dataclass(frozen=True)
class FatPointSystem:
    d: int
    n: int
    r: int
    seed: int
    field: object
    conditions_rank: int
    dim: int

    def to_json(self):
        return {
            "d": self.d,
            "n": self.n,
            "r": self.r,
            "seed": self.seed,
            "field": field_label(self.field),
            "conditions_rank": self.conditions_rank,
            "dim": self.dim,
        }


def fatpoint_dim(d: int, n: int, pointset: PointSet) -> FatPointSystem:
    if d < 0 or n < 0:
        raise ValueError("d and n must be non-negative")
    field = pointset.field
    if field != RATIONAL and n >= 2 and field <= d:
        raise ValueError(f"characteristic {field} <= degree {d}: derivative conditions are unreliable")
    total = comb(d + 2, 2)
    if n == 0:
        rank = 0
    else:
        rows = condition_rows(d, n, pointset)
        rank = rank_q(rows) if field == RATIONAL else rank_mod_p(rows, field)
    return FatPointSystem(d, n, pointset.r, pointset.seed, field, rank, total - rank)


def expected_lower_bound(d: int, n: int, r: int) -> int:
    """``C(d+2, 2) - r * n(n+1)/2``: dimension when all conditions are independent."""
    return comb(d + 2, 2) - r * n * (n + 1) // 2


def _dim_task(args):
    d, n, pointset = args
    return (d, n), fatpoint_dim(d, n, pointset).dim


def dim_grid(pointset: PointSet, d_max: int, n_max: int, jobs: int = 1) -> dict:
    tasks = [(d, n, pointset) for d in range(d_max + 1) for n in range(n_max + 1)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return dict(ex.map(_dim_task, tasks))
    return dict(map(_dim_task, tasks))


@dataclass
class ScanReport:
    s: int
    r: int
    d_max: int
    n_max: int
    seed: int
    dims: dict
    nonzero: list
    vanishing_violations: list
    lower_bound_violations: list
    cone_violations: list
    min_ratio: Fraction | None

    @property
    def ok(self) -> bool:
        return not (self.vanishing_violations or self.lower_bound_violations or self.cone_violations)

    def to_json(self):
        return {
            "s": self.s,
            "r": self.r,
            "seed": self.seed,
            "d_max": self.d_max,
            "n_max": self.n_max,
            "dims": [[d, n, v] for (d, n), v in sorted(self.dims.items())],
            "nonzero": [list(p) for p in self.nonzero],
            "vanishing_violations": [list(p) for p in self.vanishing_violations],
            "lower_bound_violations": [list(p) for p in self.lower_bound_violations],
            "cone_violations": [list(p) for p in self.cone_violations],
            "min_ratio_d_over_n": None if self.min_ratio is None else str(self.min_ratio),
            "ok": self.ok,
            "note": "min ratio is a trend on a finite grid, not an asymptotic statement",
        }


def semigroup_scan(s: int, d_max: int, n_max: int, seed: int = 0, field=MERSENNE_31, jobs: int = 1, pointset=None) -> ScanReport:
    """Graded pieces ``(d, n)`` for ``r = s^2`` points.

    ``(d, n)`` is nonzero iff ``dim(d, n) > dim(d, n+1)``.  Checks that
    ``dim(d, n) = 0`` whenever ``1 <= n`` and ``d <= n*s``, that
    ``dim(d, n) > 0`` whenever the naive count is nonnegative, and that
    nonzero pieces with ``n >= 1`` satisfy ``d > n*s``.
    """
    if s < 4:
        raise ValueError("the scan needs s >= 4")
    r = s * s
    pts = pointset if pointset is not None else random_points(r, seed, field)
    if pts.r != r:
        raise ValueError(f"point set has {pts.r} points, expected {r}")
    dims = dim_grid(pts, d_max, n_max + 1, jobs)
    nonzero, vanish, lower, cone = [], [], [], []
    for d in range(d_max + 1):
        for n in range(n_max + 1):
            v = dims[(d, n)]
            if v > dims[(d, n + 1)]:
                nonzero.append((d, n))
                if n >= 1 and d <= n * s:
                    cone.append((d, n))
            if n >= 1 and d <= n * s and v != 0:
                vanish.append((d, n))
            if d * (d + 3) // 2 - r * n * (n + 1) // 2 >= 0 and v <= 0:
                lower.append((d, n))
    ratios = [Fraction(d, n) for d, n in nonzero if n >= 1]
    main = {k: v for k, v in dims.items() if k[1] <= n_max}
    return ScanReport(s, r, d_max, n_max, pts.seed, main, nonzero, vanish, lower, cone, min(ratios) if ratios else None)
