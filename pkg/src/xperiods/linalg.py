"""Exact linear algebra over Q and Q(i).

Matrices are lists of rows. Rank uses fraction-free (Bareiss) elimination
after clearing denominators row by row.
"""
from __future__ import annotations

from fractions import Fraction
from math import lcm

from .algebra import GaussianRational


def shape(A):
    return (len(A), len(A[0]) if A else 0)


def zeros(r, c):
    return [[Fraction(0)] * c for _ in range(r)]


def identity(n):
    M = zeros(n, n)
    for k in range(n):
        M[k][k] = Fraction(1)
    return M


def matmul(A, B, inner=None):
    r = len(A)
    k = len(A[0]) if A else (inner or 0)
    c = len(B[0]) if B else 0
    if B and len(B) != k:
        raise ValueError(f"shape mismatch {r}x{k} @ {len(B)}x{c}")
    out = zeros(r, c)
    for i in range(r):
        Ai = A[i]
        row = out[i]
        for t in range(k):
            a = Ai[t]
            if a:
                Bt = B[t]
                for j in range(c):
                    b = Bt[j]
                    if b:
                        row[j] += a * b
    return out


def is_zero(A):
    return all(not x for row in A for x in row)


def _integer_rows(A):
    rows = []
    for row in A:
        row = [Fraction(x) for x in row]
        m = lcm(*(x.denominator for x in row)) if row else 1
        ints = [int(x * m) for x in row]
        if any(ints):
            rows.append(ints)
    return rows


def bareiss_rank(A) -> int:
    """Rank of a rational matrix by fraction-free elimination."""
    M = _integer_rows(A)
    if not M:
        return 0
    ncols = len(M[0])
    rank = 0
    prev = 1
    nrows = len(M)
    for col in range(ncols):
        piv = None
        for r in range(rank, nrows):
            if M[r][col]:
                piv = r
                break
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        p = M[rank][col]
        for r in range(rank + 1, nrows):
            Mr = M[r]
            a = Mr[col]
            Mrk = M[rank]
            for c in range(col + 1, ncols):
                Mr[c] = (p * Mr[c] - a * Mrk[c]) // prev
            Mr[col] = 0
        prev = p
        rank += 1
        if rank == nrows:
            break
    return rank


def rank_q(A) -> int:
    return bareiss_rank(A) if A and A[0] else 0


def rank_qi(A) -> int:
    """Rank over Q(i) via the real 2x2 block form [[A, -B], [B, A]]."""
    if not A or not A[0]:
        return 0
    G = [[GaussianRational.coerce(x) if not isinstance(x, GaussianRational) else x for x in row] for row in A]
    top = [[x.re for x in row] + [-x.im for x in row] for row in G]
    bot = [[x.im for x in row] + [x.re for x in row] for row in G]
    r = bareiss_rank(top + bot)
    assert r % 2 == 0
    return r // 2


def rref(A):
    """Reduced row echelon form over Q; returns (R, pivot_columns)."""
    M = [[Fraction(x) for x in row] for row in A]
    if not M:
        return M, []
    nrows, ncols = len(M), len(M[0])
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((k for k in range(r, nrows) if M[k][c]), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = 1 / M[r][c]
        M[r] = [x * inv for x in M[r]]
        for k in range(nrows):
            if k != r and M[k][c]:
                f = M[k][c]
                M[k] = [x - f * y for x, y in zip(M[k], M[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return M, pivots


def nullspace(A, ncols=None):
    """Basis of the right kernel {x : A x = 0}, as a list of column vectors."""
    if not A:
        n = ncols or 0
        return [[Fraction(int(i == j)) for i in range(n)] for j in range(n)]
    R, piv = rref(A)
    n = len(A[0])
    free = [c for c in range(n) if c not in piv]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for row, pc in zip(R, piv):
            v[pc] = -row[f]
        basis.append(v)
    return basis


def transpose(A, ncols=None):
    if not A:
        return [[] for _ in range(ncols or 0)]
    return [list(col) for col in zip(*A)]


def hstack(*blocks, rows=None):
    rows = rows if rows is not None else next((len(b) for b in blocks if b), 0)
    out = [[] for _ in range(rows)]
    for b in blocks:
        for i in range(rows):
            out[i].extend(b[i] if b else [])
    return out


def vstack(*blocks):
    out = []
    for b in blocks:
        out.extend([list(r) for r in b])
    return out
