"""Chain complexes over Q: simplicial chains, homology ranks, cones, total
complexes of double complexes and Cech-nerve assembly.

Homological grading throughout. A boundary ``bd[n]`` is a dense matrix of
shape ``(dims[n-1], dims[n])``.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction

from . import linalg as la
from .errors import (
    BoundaryNotSquareZero,
    MissingIntersection,
    NotSubcomplex,
    SignConventionViolation,
)


def _check_shape(M, r, c, what):
    if len(M) != r or any(len(row) != c for row in M):
        raise ValueError(f"{what}: expected shape {r}x{c}")


class ChainComplexQ:
    """Finite chain complex of Q-vector spaces in degrees ``0..top``."""

    def __init__(self, dims, boundaries=None, labels=None, check=True):
        if isinstance(dims, dict):
            top = max(dims, default=-1)
            dims = [dims.get(n, 0) for n in range(top + 1)]
        self.dims = [int(d) for d in dims]
        self.labels = labels or {}
        self.bd = {}
        for n, M in (boundaries or {}).items():
            if n <= 0 or n > self.top:
                if la.is_zero(M):
                    continue
                raise ValueError(f"boundary in degree {n} is outside the complex")
            M = [[Fraction(x) for x in row] for row in M]
            _check_shape(M, self.dim(n - 1), self.dim(n), f"boundary d_{n}")
            self.bd[n] = M
        if check:
            for n in range(2, self.top + 1):
                if not la.is_zero(la.matmul(self.d(n - 1), self.d(n), inner=self.dim(n - 1))):
                    raise BoundaryNotSquareZero(f"d_{n - 1} o d_{n} != 0")

    @property
    def top(self):
        return len(self.dims) - 1

    def dim(self, n):
        return self.dims[n] if 0 <= n < len(self.dims) else 0

    def d(self, n):
        """Boundary out of degree n, shape (dim(n-1), dim(n))."""
        if n in self.bd:
            return self.bd[n]
        return la.zeros(self.dim(n - 1), self.dim(n))

    def rank_d(self, n):
        if self.dim(n) == 0 or self.dim(n - 1) == 0:
            return 0
        return la.rank_q(self.d(n))

    def euler_characteristic(self):
        return sum((-1) ** n * d for n, d in enumerate(self.dims))

    def to_json(self):
        return {"dims": self.dims,
                "boundaries": {str(n): matrix_to_json(M) for n, M in self.bd.items()}}

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        dims = obj["dims"]
        bds = {int(n): matrix_from_json(m) for n, m in obj.get("boundaries", {}).items()}
        return cls(dims, bds)


def homology_ranks(C: ChainComplexQ):
    """Betti numbers over Q in degrees 0..top."""
    ranks = [C.rank_d(n) for n in range(C.top + 2)]
    return [C.dim(n) - ranks[n] - ranks[n + 1] for n in range(C.top + 1)]


# ---------------------------------------------------------------------------
# simplicial chains
# ---------------------------------------------------------------------------

def _simplex_keys(K):
    """Canonical (sorted) vertex tuples for a GeomComplex or an iterable of tuples."""
    simplices = getattr(K, "simplices", K)
    out = set()
    for s in simplices:
        verts = getattr(s, "vertices", s)
        out.add(tuple(sorted(_vkey(v) for v in verts)))
    return out


def _vkey(v):
    coords = getattr(v, "coords", None)
    return tuple(coords) if coords is not None else v


def simplicial_chain_complex(K, L=()):
    """Chains of K modulo L. Faces lying in L, or missing from K, are dropped."""
    Ks = _simplex_keys(K)
    Ls = _simplex_keys(L)
    if not Ls <= Ks:
        raise NotSubcomplex("L is not contained in K")
    basis = sorted((s for s in Ks if s not in Ls), key=lambda s: (len(s), s))
    top = max((len(s) - 1 for s in basis), default=-1)
    by_deg = [[s for s in basis if len(s) == n + 1] for n in range(top + 1)]
    index = [{s: k for k, s in enumerate(b)} for b in by_deg]
    bds = {}
    for n in range(1, top + 1):
        M = la.zeros(len(by_deg[n - 1]), len(by_deg[n]))
        for j, s in enumerate(by_deg[n]):
            for i in range(len(s)):
                face = s[:i] + s[i + 1:]
                k = index[n - 1].get(face)
                if k is not None:
                    M[k][j] += (-1) ** i
        bds[n] = M
    labels = {n: by_deg[n] for n in range(top + 1)}
    return ChainComplexQ([len(b) for b in by_deg], bds, labels)


# ---------------------------------------------------------------------------
# chain maps and cones
# ---------------------------------------------------------------------------

class ChainMapQ:
    def __init__(self, source: ChainComplexQ, target: ChainComplexQ, mats=None, check=True):
        self.source, self.target = source, target
        self.mats = {}
        top = max(source.top, target.top)
        for n in range(top + 1):
            M = (mats or {}).get(n)
            if M is None:
                M = la.zeros(target.dim(n), source.dim(n))
            M = [[Fraction(x) for x in row] for row in M]
            _check_shape(M, target.dim(n), source.dim(n), f"chain map in degree {n}")
            self.mats[n] = M
        if check:
            for n in range(1, top + 1):
                lhs = la.matmul(target.d(n), self.mats[n], inner=target.dim(n))
                rhs = la.matmul(self.mats[n - 1], source.d(n), inner=source.dim(n - 1))
                if lhs != rhs:
                    raise ValueError(f"not a chain map in degree {n}")

    def __getitem__(self, n):
        return self.mats.get(n) or la.zeros(self.target.dim(n), self.source.dim(n))

    @classmethod
    def identity(cls, C):
        return cls(C, C, {n: la.identity(C.dim(n)) for n in range(C.top + 1)})

    @classmethod
    def zero(cls, source, target):
        return cls(source, target, {})


def cone(phi: ChainMapQ) -> ChainComplexQ:
    """Cone_n = X_n + Y_{n-1} with d(x, y) = (dx + phi(y), -dy)."""
    X, Y = phi.target, phi.source
    top = max(X.top, Y.top + 1)
    dims = [X.dim(n) + Y.dim(n - 1) for n in range(top + 1)]
    bds = {}
    for n in range(1, top + 1):
        rows_x, rows_y = X.dim(n - 1), Y.dim(n - 2)
        cols_x, cols_y = X.dim(n), Y.dim(n - 1)
        M = la.zeros(rows_x + rows_y, cols_x + cols_y)
        dX = X.d(n)
        for i in range(rows_x):
            for j in range(cols_x):
                M[i][j] = dX[i][j]
        ph = phi[n - 1]
        for i in range(rows_x):
            for j in range(cols_y):
                M[i][cols_x + j] = ph[i][j]
        if rows_y and cols_y:
            dY = Y.d(n - 1)
            for i in range(rows_y):
                for j in range(cols_y):
                    M[rows_x + i][cols_x + j] = -dY[i][j]
        bds[n] = M
    return ChainComplexQ(dims, bds)


def _cycles(C, n):
    return la.nullspace(C.d(n), ncols=C.dim(n)) if n > 0 else \
        [[Fraction(int(i == j)) for i in range(C.dim(0))] for j in range(C.dim(0))]


def induced_rank(phi: ChainMapQ, n: int) -> int:
    """Rank of the map phi induces on H_n."""
    X, Y = phi.target, phi.source
    Z = _cycles(Y, n)
    if not Z or X.dim(n) == 0:
        return 0
    images = la.transpose(la.matmul(phi[n], la.transpose(Z), inner=Y.dim(n)))
    boundaries = la.transpose(X.d(n + 1)) if X.dim(n + 1) else []
    rb = la.rank_q(boundaries) if boundaries else 0
    both = boundaries + images
    return la.rank_q(both) - rb


# ---------------------------------------------------------------------------
# double complexes
# ---------------------------------------------------------------------------

class DoubleComplexQ:
    """Bigraded complex with commuting differentials.

    ``dh[(p, q)]``: D_{p,q} -> D_{p-1,q};  ``dv[(p, q)]``: D_{p,q} -> D_{p,q-1}.
    Total differential: d = dh + (-1)^p dv.
    """

    def __init__(self, dims, dh=None, dv=None, check=True):
        self.dims = {k: int(v) for k, v in dims.items() if v}
        self.dh = {k: [[Fraction(x) for x in r] for r in M] for k, M in (dh or {}).items()}
        self.dv = {k: [[Fraction(x) for x in r] for r in M] for k, M in (dv or {}).items()}
        for (p, q), M in self.dh.items():
            _check_shape(M, self.dim(p - 1, q), self.dim(p, q), f"dh at {(p, q)}")
        for (p, q), M in self.dv.items():
            _check_shape(M, self.dim(p, q - 1), self.dim(p, q), f"dv at {(p, q)}")
        if check:
            for (p, q) in self.dims:
                if not la.is_zero(la.matmul(self.h(p - 1, q), self.h(p, q), inner=self.dim(p - 1, q))):
                    raise SignConventionViolation(f"row at {(p, q)} is not a complex")
                if not la.is_zero(la.matmul(self.v(p, q - 1), self.v(p, q), inner=self.dim(p, q - 1))):
                    raise SignConventionViolation(f"column at {(p, q)} is not a complex")
                a = la.matmul(self.h(p, q - 1), self.v(p, q), inner=self.dim(p, q - 1))
                b = la.matmul(self.v(p - 1, q), self.h(p, q), inner=self.dim(p - 1, q))
                if a != b:
                    raise SignConventionViolation(f"square at {(p, q)} does not commute")

    def dim(self, p, q):
        return self.dims.get((p, q), 0)

    def h(self, p, q):
        return self.dh.get((p, q)) or la.zeros(self.dim(p - 1, q), self.dim(p, q))

    def v(self, p, q):
        return self.dv.get((p, q)) or la.zeros(self.dim(p, q - 1), self.dim(p, q))

    def euler_characteristic(self):
        return sum((-1) ** (p + q) * d for (p, q), d in self.dims.items())


def total_complex(D: DoubleComplexQ) -> ChainComplexQ:
    if any(p < 0 or q < 0 for p, q in D.dims):
        raise ValueError("double complex must live in p, q >= 0")
    top = max((p + q for p, q in D.dims), default=-1)
    blocks = {n: [(p, n - p) for p in range(n + 1) if D.dim(p, n - p)] for n in range(top + 1)}
    offsets = {}
    dims = []
    for n in range(top + 1):
        off = 0
        for pq in blocks[n]:
            offsets[pq] = off
            off += D.dim(*pq)
        dims.append(off)
    bds = {}
    for n in range(1, top + 1):
        M = la.zeros(dims[n - 1], dims[n])
        for (p, q) in blocks[n]:
            c0 = offsets[(p, q)]
            if D.dim(p - 1, q):
                H = D.h(p, q)
                r0 = offsets[(p - 1, q)]
                for i, row in enumerate(H):
                    for j, x in enumerate(row):
                        if x:
                            M[r0 + i][c0 + j] += x
            if D.dim(p, q - 1):
                V = D.v(p, q)
                r0 = offsets[(p, q - 1)]
                s = -1 if p % 2 else 1
                for i, row in enumerate(V):
                    for j, x in enumerate(row):
                        if x:
                            M[r0 + i][c0 + j] += s * x
        bds[n] = M
    try:
        return ChainComplexQ(dims, bds)
    except BoundaryNotSquareZero as exc:
        raise SignConventionViolation(str(exc)) from None


# ---------------------------------------------------------------------------
# Cech nerves
# ---------------------------------------------------------------------------

@dataclass
class CechData:
    """Complexes for multi-indices and maps for face deletions.

    ``complexes[J]`` is the chain complex of the intersection U^J; ``maps[(J, i)]``
    is the map induced by U^J -> U^{J without its i-th entry}.
    """

    complexes: dict = field(default_factory=dict)
    maps: dict = field(default_factory=dict)

    def complex(self, J):
        try:
            return self.complexes[J]
        except KeyError:
            raise MissingIntersection(f"no complex for multi-index {J}") from None

    def face_map(self, J, i):
        try:
            return self.maps[(J, i)]
        except KeyError:
            raise MissingIntersection(f"no map for face {i} of {J}") from None


@dataclass
class CechNerve:
    m: int
    levels: dict  # p -> list of multi-indices (tuples of length p+1)
    double: DoubleComplexQ
    truncation: int

    def total(self):
        return total_complex(self.double)

    def ranks(self):
        """Homology of Tot in degrees below the truncation level."""
        return homology_ranks(self.total())[: self.truncation]


def cech_nerve(m: int, data, truncation: int | None = None) -> CechNerve:
    """Assemble the Cech double complex of an m-set cover, levels 0..truncation.

    Multi-indices are tuples with repetitions. Degrees below ``truncation`` of
    the total complex are unaffected by the cut.
    """
    P = m + 2 if truncation is None else truncation
    levels = {p: list(itertools.product(range(m), repeat=p + 1)) for p in range(P + 1)}
    dims, dh, dv = {}, {}, {}
    offsets = {}
    qtop = 0
    for p, Js in levels.items():
        for J in Js:
            qtop = max(qtop, data.complex(J).top)
    for p, Js in levels.items():
        for q in range(qtop + 1):
            off = 0
            for J in Js:
                offsets[(p, q, J)] = off
                off += data.complex(J).dim(q)
            dims[(p, q)] = off
    for p, Js in levels.items():
        for q in range(qtop + 1):
            if not dims[(p, q)]:
                continue
            if q > 0 and dims.get((p, q - 1)):
                V = la.zeros(dims[(p, q - 1)], dims[(p, q)])
                for J in Js:
                    C = data.complex(J)
                    if not C.dim(q) or not C.dim(q - 1):
                        continue
                    r0, c0 = offsets[(p, q - 1, J)], offsets[(p, q, J)]
                    for i, row in enumerate(C.d(q)):
                        for j, x in enumerate(row):
                            if x:
                                V[r0 + i][c0 + j] = x
                dv[(p, q)] = V
            if p > 0 and dims.get((p - 1, q)):
                H = la.zeros(dims[(p - 1, q)], dims[(p, q)])
                for J in Js:
                    if not data.complex(J).dim(q):
                        continue
                    c0 = offsets[(p, q, J)]
                    for i in range(p + 1):
                        face = J[:i] + J[i + 1:]
                        phi = data.face_map(J, i)[q]
                        r0 = offsets[(p - 1, q, face)]
                        sgn = -1 if i % 2 else 1
                        for a, row in enumerate(phi):
                            for b, x in enumerate(row):
                                if x:
                                    H[r0 + a][c0 + b] += sgn * x
                dh[(p, q)] = H
    D = DoubleComplexQ(dims, dh, dv)
    return CechNerve(m, levels, D, P)


def subcomplex_cover(K, cover):
    """Cech data for a simplicial complex covered by subcomplexes.

    ``K`` and each element of ``cover`` are iterables of vertex tuples (or
    GeomComplexes); intersections are taken simplex-wise.
    """
    sets = [_simplex_keys(U) for U in cover]
    allK = _simplex_keys(K)
    for s in sets:
        if not s <= allK:
            raise NotSubcomplex("cover element is not a subcomplex of K")
    cache = {}

    def chains(J):
        key = frozenset(J)
        if key not in cache:
            inter = set.intersection(*(sets[j] for j in key))
            cache[key] = simplicial_chain_complex(sorted(inter))
        return cache[key]

    class _Data(CechData):
        def complex(self, J):
            return chains(J)

        def face_map(self, J, i):
            src = chains(J)
            tgt = chains(J[:i] + J[i + 1:])
            mats = {}
            for n in range(src.top + 1):
                M = la.zeros(tgt.dim(n), src.dim(n))
                tindex = {s: k for k, s in enumerate(tgt.labels.get(n, []))}
                for j, s in enumerate(src.labels.get(n, [])):
                    M[tindex[s]][j] = Fraction(1)
                mats[n] = M
            return ChainMapQ(src, tgt, mats, check=False)

    return _Data()


# ---------------------------------------------------------------------------
# matrix JSON
# ---------------------------------------------------------------------------

def matrix_to_json(M, cols=None):
    rows = len(M)
    cols = cols if cols is not None else (len(M[0]) if M else 0)
    entries = [[i, j, str(x)] for i, row in enumerate(M) for j, x in enumerate(row) if x]
    return {"rows": rows, "cols": cols, "entries": entries}


def matrix_from_json(obj):
    if isinstance(obj, str):
        obj = json.loads(obj)
    M = la.zeros(int(obj["rows"]), int(obj["cols"]))
    for i, j, x in obj.get("entries", []):
        M[int(i)][int(j)] = Fraction(str(x))
    return M
