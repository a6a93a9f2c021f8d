"""Oriented real blow-up models of genus-0 curves with a rational function.

A curve is P^1 minus ``punctures`` with marked points ``Y`` and a rational
function ``f``. Each puncture becomes a boundary circle. At a pole of order
``d`` the directions along which Re f -> +inf form ``d`` open arcs (the
boundary of B°) with ``d`` distinguished points (where f -> 1inf, the
boundary of B#). Both are modelled by one finite CW pair.
"""
from __future__ import annotations

import cmath
import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

from . import linalg as la
from .algebra import GaussianRational, Poly, RatFunc, parse_constant, parse_ratfunc, poly_divmod, univariate_gcd
from .chains import ChainComplexQ, homology_ranks
from .errors import MissingDirection, UnsupportedShape

INF = "inf"


def _pt(x):
    if isinstance(x, str) and x.strip().lower() in ("inf", "oo", "infinity"):
        return INF
    if x == INF:
        return INF
    return GaussianRational.coerce(x) if not isinstance(x, str) else parse_constant(x, exact=True)


@dataclass(frozen=True)
class CurveSpec:
    punctures: tuple
    marked: tuple
    f: RatFunc

    def __post_init__(self):
        punct = tuple(_pt(p) for p in self.punctures)
        marked = tuple(_pt(y) for y in self.marked)
        if INF in marked:
            raise ValueError("marked points must be finite points of the curve")
        if len(set(punct)) != len(punct) or len(set(marked)) != len(marked):
            raise ValueError("duplicate point")
        if set(punct) & set(marked):
            raise ValueError("marked points must not be punctures")
        f = self.f
        f = parse_ratfunc(f, ("z",)) if isinstance(f, str) else RatFunc.coerce(f).with_vars(("z",))
        object.__setattr__(self, "punctures", punct)
        object.__setattr__(self, "marked", marked)
        object.__setattr__(self, "f", f)
        num, den = _reduced(f)
        rest = den
        for p in punct:
            if p != INF:
                rest, _ = _strip_root(rest, p)
        if rest.degree() > 0:
            raise ValueError("f has a pole at a point of the curve")
        if INF not in punct and num.degree() > den.degree():
            raise ValueError("f has a pole at infinity, which is not a puncture")

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(tuple(obj.get("punctures", [INF])), tuple(obj.get("marked", [])), obj["f"])

    def to_json(self):
        return {"punctures": [str(p) for p in self.punctures],
                "marked": [str(y) for y in self.marked], "f": str(self.f)}

    @classmethod
    def affine_line(cls, f, marked=()):
        return cls((INF,), tuple(marked), f)


def _reduced(f: RatFunc):
    num, den = f.num.with_vars(("z",)), f.den.with_vars(("z",))
    if num.is_zero():
        return num, Poly.const(1, ("z",))
    g = univariate_gcd(num, den)
    if g.degree() > 0:
        num, _ = poly_divmod(num, g, "z")
        den, _ = poly_divmod(den, g, "z")
    return num, den


def _strip_root(p: Poly, a):
    """Divide out (z - a) as often as possible; returns (quotient, multiplicity)."""
    lin = Poly(("z",), {(1,): 1, (0,): -a})
    k = 0
    while p.degree() > 0:
        q, r = poly_divmod(p, lin, "z")
        if not r.is_zero():
            break
        p, k = q, k + 1
    return p, k


@dataclass(frozen=True)
class PoleDatum:
    location: object
    order: int


def classify_punctures(spec: CurveSpec):
    """Split the punctures into Z_f (f finite there) and Z_inf with pole orders."""
    num, den = _reduced(spec.f)
    Zf, Zinf = [], []
    for p in spec.punctures:
        if p == INF:
            d = max(num.degree() - den.degree(), 0) if not num.is_zero() else 0
        else:
            _, d = _strip_root(den, p)
        (Zinf if d > 0 else Zf).append(PoleDatum(p, d))
    return Zf, Zinf


# ---------------------------------------------------------------------------
# CW model
# ---------------------------------------------------------------------------

@dataclass
class Circle:
    location: object
    order: int  # 0 for Z_f
    vertices: list
    edges: list  # (name, tail, head)
    good_arcs: list = field(default_factory=list)  # edge names forming the B° boundary
    sharp_points: list = field(default_factory=list)  # vertex names forming the B# boundary


@dataclass
class CurveRdModel:
    spec: CurveSpec
    circles: list
    vertices: list
    edges: list  # (name, tail, head)
    faces: list  # (name, {edge: coefficient})
    marked_vertices: list

    @property
    def n_arcs(self):
        return sum(len(c.good_arcs) for c in self.circles)

    @property
    def n_sharp_points(self):
        return sum(len(c.sharp_points) for c in self.circles)

    def euler_characteristic(self):
        return len(self.vertices) - len(self.edges) + len(self.faces)

    def subcomplex(self, variant="bcirc"):
        verts = set(self.marked_vertices)
        edges = set()
        for c in self.circles:
            if variant == "bcirc":
                for name in c.good_arcs:
                    _, t, h = next(e for e in c.edges if e[0] == name)
                    edges.add(name)
                    verts |= {t, h}
            elif variant == "bsharp":
                verts |= set(c.sharp_points)
            else:
                raise ValueError(f"unknown model variant {variant!r}")
        return verts, edges

    def chain_complex(self, variant="bcirc", relative=True) -> ChainComplexQ:
        sv, se = self.subcomplex(variant) if relative else (set(), set())
        V = [v for v in self.vertices if v not in sv]
        E = [e for e in self.edges if e[0] not in se]
        F = self.faces
        vi = {v: k for k, v in enumerate(V)}
        ei = {e[0]: k for k, e in enumerate(E)}
        d1 = la.zeros(len(V), len(E))
        for j, (_, t, h) in enumerate(E):
            if h in vi:
                d1[vi[h]][j] += 1
            if t in vi:
                d1[vi[t]][j] -= 1
        d2 = la.zeros(len(E), len(F))
        for j, (_, bd) in enumerate(F):
            for name, c in bd.items():
                if name in ei:
                    d2[ei[name]][j] += c
        return ChainComplexQ([len(V), len(E), len(F)], {1: d1, 2: d2})


def build_rd_model(spec: CurveSpec) -> CurveRdModel:
    Zf, Zinf = classify_punctures(spec)
    orders = {p.location: p.order for p in Zf + Zinf}
    vertices = ["b"]
    edges = []
    circles = []
    face_bd = {}
    for k, loc in enumerate(spec.punctures):
        d = orders[loc]
        nv = 2 * d if d > 0 else 1
        vs = [f"c{k}v{j}" for j in range(nv)]
        es = [(f"c{k}e{j}", vs[j], vs[(j + 1) % nv]) for j in range(nv)]
        circ = Circle(loc, d, vs, es)
        if d > 0:
            circ.good_arcs = [es[2 * j][0] for j in range(d)]
            circ.sharp_points = [vs[2 * j] for j in range(d)]
        circles.append(circ)
        vertices.extend(vs)
        edges.extend(es)
        spoke = (f"s{k}", "b", vs[0])
        edges.append(spoke)
        for name, _, _ in es:
            face_bd[name] = face_bd.get(name, 0) + 1
    marked = []
    for k, _ in enumerate(spec.marked):
        v = f"y{k}"
        vertices.append(v)
        edges.append((f"t{k}", "b", v))
        marked.append(v)
    faces = [("D", face_bd)]
    return CurveRdModel(spec, circles, vertices, edges, faces, marked)


def rd_ranks(spec: CurveSpec, variant="bcirc"):
    return homology_ranks(build_rd_model(spec).chain_complex(variant))


def rd_rank(spec: CurveSpec, n: int, variant="bcirc") -> int:
    ranks = rd_ranks(spec, variant)
    return ranks[n] if 0 <= n < len(ranks) else 0


def rd_generators(spec: CurveSpec):
    """Ray directions exp(2 pi i m/n), m = 0..n-1, for (A^1, {0}, z^n)."""
    from .periods import root_of_unity

    f = spec.f
    ok = (spec.punctures == (INF,) and spec.marked == (GaussianRational(0),)
          and f.is_polynomial() and len(f.num.terms) == 1)
    if ok:
        (e, c), = f.num.terms.items()
        ok = c == 1 and e[0] >= 1
    if not ok:
        raise UnsupportedShape("generators are only synthesised for (A^1, {0}, z^n)")
    n = e[0]
    return [root_of_unity(m, n) for m in range(n)]


# ---------------------------------------------------------------------------
# blow-up chart
# ---------------------------------------------------------------------------

def _exact_sqrt(q: Fraction):
    if q < 0:
        return None
    a, b = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if a * a == q.numerator and b * b == q.denominator:
        return Fraction(a, b)
    return None


def blowup_chart(x, m: int, directions=None):
    """Polar coordinates along the first m coordinate hyperplanes.

    Returns (r, w, rest) with z_i = r_i w_i. Exact when every |z_i| is rational.
    """
    x = list(x)
    if m > len(x):
        raise ValueError("m exceeds the dimension")
    directions = directions or {}
    rs, ws = [], []
    for i in range(m):
        z = x[i]
        zero = (z == 0) if isinstance(z, GaussianRational) else complex(z) == 0
        if zero:
            if i not in directions:
                raise MissingDirection(f"coordinate {i} lies on the divisor; supply a direction")
            w = directions[i]
            if isinstance(w, GaussianRational):
                r = _exact_sqrt(w.norm())
                w = w / r if r is not None else complex(w) / abs(complex(w))
            else:
                w = complex(w) / abs(complex(w))
            rs.append(Fraction(0) if isinstance(w, GaussianRational) else 0.0)
            ws.append(w)
            continue
        if isinstance(z, (int, Fraction)):
            z = GaussianRational(z)
        if isinstance(z, GaussianRational):
            r = _exact_sqrt(z.norm())
            if r is not None:
                rs.append(r)
                ws.append(z / r)
                continue
            z = complex(z)
        z = complex(z)
        rs.append(abs(z))
        ws.append(z / abs(z))
    return rs, ws, x[m:]


def blowup_chart_inverse(r, w, rest=()):
    return [ri * wi for ri, wi in zip(r, w)] + list(rest)


# ---------------------------------------------------------------------------
# random specs for property tests
# ---------------------------------------------------------------------------

def random_curve_spec(rng: random.Random) -> CurveSpec:
    pool = [GaussianRational(a, b) for a in range(-2, 3) for b in range(-1, 2)]
    k = rng.randint(0, 3)
    finite = rng.sample(pool, k)
    punctures = finite + ([INF] if rng.random() < 0.85 or not finite else [])
    rest = [p for p in pool if p not in finite]
    marked = rng.sample(rest, rng.randint(0, 3))
    z = Poly.var("z", ("z",))
    num = Poly.const(rng.randint(1, 3), ("z",))
    if INF in punctures:
        for _ in range(rng.randint(0, 3)):
            num = num * (z - GaussianRational(rng.randint(-2, 2), rng.randint(-1, 1)))
    den = Poly.const(1, ("z",))
    for p in finite:
        den = den * (z - p) ** rng.randint(0, 2)
    if INF not in punctures and num.degree() > den.degree():
        num = Poly.const(1, ("z",))
    return CurveSpec(tuple(punctures), tuple(marked), RatFunc(num, den))


def laurent_direction_points(f: RatFunc, loc, order: int):
    """Directions at a pole of order d along which f -> 1inf (numeric)."""
    num, den = _reduced(f)
    if loc == INF:
        lead = complex(num.univariate_coeffs("z")[-1]) / complex(den.univariate_coeffs("z")[-1])
        # f ~ lead * z^d, z = R e^{i theta}
        base = -cmath.phase(lead) / order
    else:
        rest, _ = _strip_root(den, loc)
        c = complex(num.eval_exact([loc])) / complex(rest.eval_exact([loc]))
        # f ~ c (z - a)^{-d}
        base = cmath.phase(c) / order
    return [cmath.exp(1j * (base + 2 * math.pi * k / order)) for k in range(order)]
