"""Geometric simplicial complexes over Q: faces, validity, closure, barycentric
subdivision, closed core and the straight-line retraction onto the closed
core of the subdivision. Everything here is exact.
"""
from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass
from fractions import Fraction

from . import linalg as la
from .errors import DimensionMismatch, InvalidComplex, NotInPolyhedron


def _q(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("floats are not allowed in exact geometry")
    return Fraction(x)


def point(*coords):
    if len(coords) == 1 and isinstance(coords[0], (tuple, list)):
        coords = coords[0]
    return tuple(_q(c) for c in coords)


def _sum(points, weights):
    n = len(points[0])
    return tuple(sum((w * p[k] for p, w in zip(points, weights)), Fraction(0)) for k in range(n))


class OpenSimplex:
    """Open simplex spanned by affinely independent rational points.

    Equality and hashing use the vertex set; the stored order is the
    orientation.
    """

    __slots__ = ("vertices", "_key")

    def __init__(self, vertices, check=True):
        self.vertices = tuple(point(v) for v in vertices)
        if not self.vertices:
            raise InvalidComplex("a simplex needs at least one vertex")
        self._key = frozenset(self.vertices)
        if len(self._key) != len(self.vertices):
            raise InvalidComplex("repeated vertex")
        if check and len(self.vertices) > 1:
            a0 = self.vertices[0]
            diffs = [[x - y for x, y in zip(a, a0)] for a in self.vertices[1:]]
            if la.rank_q(diffs) != len(diffs):
                raise InvalidComplex("vertices are not affinely independent")

    @property
    def dim(self):
        return len(self.vertices) - 1

    @property
    def ambient(self):
        return len(self.vertices[0])

    def __eq__(self, other):
        return isinstance(other, OpenSimplex) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        def fmt(p):
            return "(" + ",".join(str(c) for c in p) + ")" if len(p) > 1 else str(p[0])
        return "<" + ",".join(fmt(v) for v in self.vertices) + ">"

    def sorted_vertices(self):
        return tuple(sorted(self.vertices))

    def orientation_sign(self) -> int:
        """Sign of the permutation taking the sorted order to the stored order."""
        order = [self.sorted_vertices().index(v) for v in self.vertices]
        sign = 1
        for i in range(len(order)):
            for j in range(i + 1, len(order)):
                if order[i] > order[j]:
                    sign = -sign
        return sign

    def barycenter(self):
        n = len(self.vertices)
        return _sum(self.vertices, [Fraction(1, n)] * n)

    def is_face_of(self, other: "OpenSimplex") -> bool:
        return self._key <= other._key

    def barycentric(self, x):
        """Exact barycentric coordinates of x in the affine hull, or None."""
        x = point(x)
        if len(x) != self.ambient:
            raise DimensionMismatch("point and simplex live in different dimensions")
        n = len(self.vertices)
        # columns: vertices; rows: coordinates plus the affine constraint
        A = [[v[k] for v in self.vertices] + [x[k]] for k in range(self.ambient)]
        A.append([Fraction(1)] * n + [Fraction(1)])
        R, piv = la.rref(A)
        if n in piv:
            return None
        lam = [Fraction(0)] * n
        for row, pc in zip(R, piv):
            lam[pc] = row[n]
        return lam

    def contains(self, x) -> bool:
        lam = self.barycentric(x)
        return lam is not None and all(c > 0 for c in lam)

    def point_at(self, weights):
        return _sum(self.vertices, weights)


def faces(sigma: OpenSimplex):
    vs = sigma.vertices
    out = set()
    for k in range(1, len(vs) + 1):
        for sub in itertools.combinations(vs, k):
            out.add(OpenSimplex(sub, check=False))
    return out


class GeomComplex:
    """Finite set of open simplices (validity is checked by ``validate_complex``)."""

    def __init__(self, simplices=(), ambient=None):
        simplices = [s if isinstance(s, OpenSimplex) else OpenSimplex(s) for s in simplices]
        self.simplices = frozenset(simplices)
        if len(self.simplices) != len(simplices):
            raise InvalidComplex("duplicate simplex")
        dims = {s.ambient for s in self.simplices}
        if len(dims) > 1:
            raise DimensionMismatch("simplices live in different ambient spaces")
        self.ambient = dims.pop() if dims else ambient

    def __iter__(self):
        return iter(sorted(self.simplices, key=lambda s: (s.dim, s.sorted_vertices())))

    def __len__(self):
        return len(self.simplices)

    def __contains__(self, s):
        return s in self.simplices

    def __eq__(self, other):
        return isinstance(other, GeomComplex) and self.simplices == other.simplices

    def __hash__(self):
        return hash(self.simplices)

    def __le__(self, other):
        return self.simplices <= other.simplices

    def __repr__(self):
        return "GeomComplex{" + ", ".join(repr(s) for s in self) + "}"

    def vertices(self):
        return sorted({v for s in self.simplices for v in s.vertices})

    def is_closed(self) -> bool:
        return all(f in self.simplices for s in self.simplices for f in faces(s))

    def contains_point(self, x) -> bool:
        return any(s.contains(x) for s in self.simplices)

    # -- JSON --------------------------------------------------------------
    def to_json(self):
        verts = self.vertices()
        index = {v: k for k, v in enumerate(verts)}
        return {
            "ambient": self.ambient,
            "vertices": [[str(c) for c in v] for v in verts],
            "simplices": [[index[v] for v in s.vertices] for s in self],
        }

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        verts = [point([Fraction(str(c)) for c in v]) for v in obj["vertices"]]
        amb = obj.get("ambient")
        if amb is not None and any(len(v) != amb for v in verts):
            raise DimensionMismatch("vertex does not match ambient dimension")
        return cls([OpenSimplex([verts[k] for k in s]) for s in obj["simplices"]], ambient=amb)


# ---------------------------------------------------------------------------
# exact LP for the pairwise complex condition
# ---------------------------------------------------------------------------

def _lp_max(c, A, b):
    """Maximise c.x subject to A x = b, x >= 0, exactly (two-phase, Bland).

    Returns the optimum, or None if infeasible. Bounded problems only.
    """
    m, n = len(A), len(c)
    A = [[Fraction(x) for x in row] for row in A]
    b = [Fraction(x) for x in b]
    for i in range(m):
        if b[i] < 0:
            A[i] = [-x for x in A[i]]
            b[i] = -b[i]
    # tableau with artificials n..n+m-1
    T = [A[i] + [Fraction(int(i == j)) for j in range(m)] + [b[i]] for i in range(m)]
    basis = list(range(n, n + m))
    width = n + m

    def pivot(r, col):
        p = T[r][col]
        T[r] = [x / p for x in T[r]]
        for i in range(m):
            if i != r and T[i][col]:
                f = T[i][col]
                T[i] = [x - f * y for x, y in zip(T[i], T[r])]
        basis[r] = col

    def run(cost, allowed):
        while True:
            # reduced costs: cost_j - c_B B^-1 A_j  (maximisation)
            red = []
            for j in range(width):
                if j not in allowed or j in basis:
                    red.append(Fraction(0))
                    continue
                red.append(cost[j] - sum(cost[basis[i]] * T[i][j] for i in range(m)))
            enter = next((j for j in range(width) if red[j] > 0), None)
            if enter is None:
                return sum(cost[basis[i]] * T[i][-1] for i in range(m))
            rows = [(T[i][-1] / T[i][enter], basis[i], i) for i in range(m) if T[i][enter] > 0]
            if not rows:
                raise ValueError("unbounded LP")
            _, _, r = min(rows)
            pivot(r, enter)

    phase1 = [Fraction(0)] * n + [Fraction(-1)] * m
    if run(phase1, set(range(width))) < 0:
        return None
    # drive remaining artificials out of the basis where possible
    for i in range(m):
        if basis[i] >= n:
            col = next((j for j in range(n) if T[i][j]), None)
            if col is not None:
                pivot(i, col)
    cost = [Fraction(x) for x in c] + [Fraction(0)] * m
    return run(cost, set(range(n)))


def _pair_violation(s1: OpenSimplex, s2: OpenSimplex) -> bool:
    A, B = list(s1.vertices), list(s2.vertices)
    C = set(A) & set(B)
    # quick reject on bounding boxes
    for k in range(s1.ambient):
        if max(v[k] for v in A) < min(v[k] for v in B) or max(v[k] for v in B) < min(v[k] for v in A):
            return False
    N = s1.ambient
    rows = []
    for k in range(N):
        rows.append([a[k] for a in A] + [-bb[k] for bb in B])
    rows.append([Fraction(1)] * len(A) + [Fraction(0)] * len(B))
    rows.append([Fraction(0)] * len(A) + [Fraction(1)] * len(B))
    rhs = [Fraction(0)] * N + [Fraction(1), Fraction(1)]
    cost = [Fraction(0) if a in C else Fraction(1) for a in A] + [Fraction(0)] * len(B)
    opt = _lp_max(cost, rows, rhs)
    return opt is not None and opt > 0


@dataclass
class ValidationReport:
    ok: bool
    pair: tuple | None = None

    def __bool__(self):
        return self.ok


def validate_complex(K) -> ValidationReport:
    simplices = sorted(getattr(K, "simplices", K), key=lambda s: (s.dim, s.sorted_vertices()))
    for s in simplices:
        OpenSimplex(s.vertices)  # affine independence
    for i, s1 in enumerate(simplices):
        for s2 in simplices[i + 1:]:
            if _pair_violation(s1, s2):
                return ValidationReport(False, (s1, s2))
    return ValidationReport(True)


# ---------------------------------------------------------------------------
# closure, subdivision, core
# ---------------------------------------------------------------------------

def closure_complex(K: GeomComplex) -> GeomComplex:
    out = set()
    for s in K.simplices:
        out |= faces(s)
    return GeomComplex(out, ambient=K.ambient)


def barycentric_subdivision(K: GeomComplex) -> GeomComplex:
    closed = closure_complex(K)
    below = {s: [f for f in faces(s) if f != s] for s in closed.simplices}
    chains_ending = {}

    def chains(top):
        # strictly increasing chains of faces ending at ``top``
        if top not in chains_ending:
            out = [(top,)]
            for f in below[top]:
                out.extend(c + (top,) for c in chains(f))
            chains_ending[top] = out
        return chains_ending[top]

    out = set()
    for s in K.simplices:
        for c in chains(s):
            out.add(OpenSimplex([f.barycenter() for f in c], check=False))
    return GeomComplex(out, ambient=K.ambient)


def closed_core(K: GeomComplex) -> GeomComplex:
    return GeomComplex([s for s in K.simplices if all(f in K.simplices for f in faces(s))],
                       ambient=K.ambient)


def carrier(K: GeomComplex, x) -> OpenSimplex:
    x = point(x)
    for s in K:
        if s.contains(x):
            return s
    raise NotInPolyhedron(f"{tuple(str(c) for c in x)} is not in |K|")


def _flag_decomposition(sigma: OpenSimplex, x):
    """Carrier of x in the subdivision of sigma, as (faces, weights).

    With barycentric coordinates mu of x in sigma and distinct values
    v1 > ... > vr, the faces are F_j = {mu >= v_j} and the weights
    (v_j - v_{j+1}) |F_j|; x = sum_j w_j b(F_j).
    """
    mu = sigma.barycentric(x)
    levels = sorted(set(mu), reverse=True)
    faces_, weights = [], []
    for j, v in enumerate(levels):
        nxt = levels[j + 1] if j + 1 < len(levels) else Fraction(0)
        F = [a for a, m in zip(sigma.vertices, mu) if m >= v]
        faces_.append(OpenSimplex(F, check=False))
        weights.append((v - nxt) * len(F))
    return faces_, weights


def subdivision_carrier(K: GeomComplex, x) -> OpenSimplex:
    """Carrier of x in the barycentric subdivision of K, without building it."""
    sigma = carrier(K, x)
    F, _ = _flag_decomposition(sigma, x)
    return OpenSimplex([f.barycenter() for f in F], check=False)


def retract(K: GeomComplex, x):
    """r(x) = sum_{s in K} lambda_s(x) b(s) / Lambda(x)."""
    x = point(x)
    sigma = carrier(K, x)
    F, w = _flag_decomposition(sigma, x)
    keep = [(f, c) for f, c in zip(F, w) if f in K.simplices]
    Lam = sum(c for _, c in keep)
    return _sum([f.barycenter() for f, _ in keep], [c / Lam for _, c in keep])


def homotopy(K: GeomComplex, x, t):
    t = _q(t)
    if not 0 <= t <= 1:
        raise ValueError("t must lie in [0, 1]")
    x = point(x)
    r = retract(K, x)
    return tuple((1 - t) * a + t * b for a, b in zip(x, r))


# ---------------------------------------------------------------------------
# random test complexes
# ---------------------------------------------------------------------------

def freudenthal_simplices(n_cells=2, dim=3):
    """All simplices of the Freudenthal triangulation of [0, n_cells]^dim."""
    out = set()
    for corner in itertools.product(range(n_cells), repeat=dim):
        for perm in itertools.permutations(range(dim)):
            p = list(corner)
            verts = [tuple(Fraction(c) for c in p)]
            for axis in perm:
                p[axis] += 1
                verts.append(tuple(Fraction(c) for c in p))
            top = OpenSimplex(verts, check=False)
            out |= faces(top)
    return sorted(out, key=lambda s: (s.dim, s.sorted_vertices()))


def random_affine(rng: random.Random, dim=3):
    while True:
        M = [[Fraction(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(dim)] for _ in range(dim)]
        if la.rank_q(M) == dim:
            break
    t = [Fraction(rng.randint(-5, 5), rng.randint(1, 4)) for _ in range(dim)]

    def apply(p):
        return tuple(sum((M[i][j] * p[j] for j in range(dim)), Fraction(0)) + t[i] for i in range(dim))

    return apply


_FREUDENTHAL = None


def random_complex(rng: random.Random, max_simplices=20, dim=3) -> GeomComplex:
    """Random sub-collection of a Freudenthal triangulation, moved by an affine map."""
    global _FREUDENTHAL
    if dim == 3:
        if _FREUDENTHAL is None:
            _FREUDENTHAL = freudenthal_simplices(2, 3)
        pool = _FREUDENTHAL
    else:
        pool = freudenthal_simplices(2, dim)
    k = rng.randint(1, max_simplices)
    chosen = rng.sample(pool, k)
    f = random_affine(rng, dim)
    return GeomComplex([OpenSimplex([f(v) for v in s.vertices], check=False) for s in chosen])


def random_point(rng: random.Random, K: GeomComplex):
    s = rng.choice(sorted(K.simplices, key=lambda s: (s.dim, s.sorted_vertices())))
    w = [Fraction(rng.randint(1, 9)) for _ in s.vertices]
    tot = sum(w)
    return s.point_at([c / tot for c in w]), s
