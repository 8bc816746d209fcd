"""Matrix rank over Q (exact integers) and over a prime field (numpy int64)."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

import numpy as np

MERSENNE_31 = 2 ** 31 - 1


def _integer_rows(rows) -> list:
    out = []
    for row in rows:
        den = 1
        for c in row:
            if isinstance(c, Fraction):
                den = den * c.denominator // math.gcd(den, c.denominator)
        out.append([int(c * den) for c in row])
    return out


def rank_q(rows: Sequence[Sequence]) -> int:
    """Exact rank over Q by fraction-free elimination on integer rows."""
    mat = [r for r in _integer_rows(rows) if any(r)]
    if not mat:
        return 0
    ncols = len(mat[0])
    rank = 0
    for col in range(ncols):
        pivot = next((i for i in range(rank, len(mat)) if mat[i][col]), None)
        if pivot is None:
            continue
        mat[rank], mat[pivot] = mat[pivot], mat[rank]
        prow = mat[rank]
        p = prow[col]
        for i in range(rank + 1, len(mat)):
            c = mat[i][col]
            if c:
                row = [p * a - c * b for a, b in zip(mat[i], prow)]
                g = 0
                for a in row:
                    g = math.gcd(g, a)
                mat[i] = [a // g for a in row] if g > 1 else row
        rank += 1
        if rank == len(mat):
            break
    return rank


def rank_mod_p(rows, p: int = MERSENNE_31) -> int:
    """Rank over F_p; entries are reduced mod ``p``.  Needs ``p < 2^31``."""
    if p >= 2 ** 31:
        raise ValueError("modulus must be below 2^31 so products fit in int64")
    mat = np.array([[int(c) % p for c in r] for r in rows], dtype=np.int64)
    if mat.size == 0:
        return 0
    nrows, ncols = mat.shape
    rank = 0
    for col in range(ncols):
        if rank == nrows:
            break
        nz = np.nonzero(mat[rank:, col])[0]
        if nz.size == 0:
            continue
        piv = rank + int(nz[0])
        if piv != rank:
            mat[[rank, piv]] = mat[[piv, rank]]
        inv = pow(int(mat[rank, col]), p - 2, p)
        mat[rank] = (mat[rank] * inv) % p
        below = mat[rank + 1:, col].copy()
        mask = below != 0
        if mask.any():
            idx = np.nonzero(mask)[0] + rank + 1
            factors = below[mask][:, None]
            mat[idx] = (mat[idx] - (factors * mat[rank][None, :]) % p) % p
        rank += 1
    return rank
