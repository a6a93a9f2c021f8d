"""Twisted de Rham cohomology of (A^1, Y, f) by truncated linear algebra.

The complex is ``k[z] -> k[z] dz + k^Y``, ``P -> (P' - f' P, (P(y))_y)``.
Functions of degree <= N map into forms of degree <= N + deg f - 1, so the
truncated map sees the whole image of its domain and H^1 is its cokernel.
"""
from __future__ import annotations

from dataclasses import dataclass

from .algebra import ZERO, GaussianRational, Poly, RatForm, RatFunc, d_f_apply, parse_ratfunc
from .errors import NotStabilized, UnsupportedShape
from .linalg import rank_qi

__all__ = ["d_f_apply", "TruncatedComplex", "truncated_complex", "h1_rank", "h1_basis"]


def _as_poly(f) -> Poly:
    f = parse_ratfunc(f, ("z",)) if isinstance(f, str) else RatFunc.coerce(f)
    if not f.is_polynomial():
        raise UnsupportedShape("f must be a polynomial in z")
    p = f.num * f.den.constant_value().inverse()
    return p.with_vars(("z",))


@dataclass
class TruncatedComplex:
    N: int
    f: Poly
    Y: tuple
    matrix: list  # rows: z^0 dz .. z^M dz, then one row per y; columns: z^0 .. z^N

    @property
    def form_rows(self):
        return len(self.matrix) - len(self.Y)

    @property
    def shape(self):
        return len(self.matrix), self.N + 1

    def rank(self):
        return rank_qi(self.matrix)

    def coker_rank(self):
        return len(self.matrix) - self.rank()


def truncated_complex(f, Y, N: int) -> TruncatedComplex:
    p = _as_poly(f)
    Y = tuple(GaussianRational.coerce(y) if not isinstance(y, GaussianRational) else y for y in Y)
    n = max(p.degree(), 0)
    fc = p.univariate_coeffs("z")
    dfc = [fc[k] * k for k in range(1, len(fc))] or [ZERO]
    rows = N + n if n >= 1 else N  # forms z^0..z^{rows-1} dz
    M = [[ZERO] * (N + 1) for _ in range(rows + len(Y))]
    for k in range(N + 1):
        # d(z^k) = k z^{k-1} dz
        if k >= 1 and k - 1 < rows:
            M[k - 1][k] = M[k - 1][k] + k
        # - f' z^k
        for j, c in enumerate(dfc):
            if c and k + j < rows:
                M[k + j][k] = M[k + j][k] - c
            elif c:
                raise AssertionError("truncation too small for the image")
        for r, y in enumerate(Y):
            M[rows + r][k] = y ** k
    return TruncatedComplex(N, p, Y, M)


def _step(p: Poly):
    return max(p.degree(), 1)


def h1_rank(f, Y, N: int | None = None) -> int:
    """dim H^1 of (A^1, Y, f), confirmed at truncations N and N + deg f."""
    p = _as_poly(f)
    n = max(p.degree(), 0)
    if N is None:
        N = max(2 * n, 2)
    if N < 2 * n:
        raise ValueError(f"truncation N={N} is below 2*deg f={2 * n}")
    r1 = truncated_complex(p, Y, N).coker_rank()
    r2 = truncated_complex(p, Y, N + _step(p)).coker_rank()
    if r1 != r2:
        raise NotStabilized(f"cokernel ranks {r1} (N={N}) and {r2} (N={N + _step(p)}) differ")
    return r1


@dataclass
class Cocycle:
    form: RatForm  # Q dz
    values: tuple  # a_y in the order of Y

    def __repr__(self):
        return f"({self.form}, {tuple(str(v) for v in self.values)})"


def h1_basis(f, Y, N: int | None = None):
    """Cocycle representatives (Q dz, a) whose classes form a basis of H^1.

    Candidates z^k dz (k ascending), then the unit vectors on Y, are kept
    greedily when they are independent modulo the image and earlier picks.
    """
    p = _as_poly(f)
    rank = h1_rank(p, Y, N)
    n = max(p.degree(), 0)
    N = max(2 * n, 2) if N is None else N
    T = truncated_complex(p, Y, N)
    cols = [[row[k] for row in T.matrix] for k in range(N + 1)]
    total = len(T.matrix)
    base = rank_qi(_transpose(cols)) if cols else 0
    chosen = []
    picks = []
    for idx in range(total):
        if len(picks) == rank:
            break
        cand = [ZERO] * total
        cand[idx] = GaussianRational(1)
        r = rank_qi(_transpose(cols + chosen + [cand]))
        if r > base + len(chosen):
            chosen.append(cand)
            picks.append(idx)
    out = []
    rows = T.form_rows
    for idx in picks:
        vals = [ZERO] * len(T.Y)
        if idx < rows:
            form = RatForm(1, ("z",), {(0,): RatFunc(Poly(("z",), {(idx,): 1}))})
        else:
            form = RatForm(1, ("z",), {})
            vals[idx - rows] = GaussianRational(1)
        out.append(Cocycle(form, tuple(vals)))
    return out


def _transpose(cols):
    return [list(r) for r in zip(*cols)]
