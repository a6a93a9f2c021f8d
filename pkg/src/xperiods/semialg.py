"""Strips, boundary directions of the circle-compactified plane, sign-condition
regions and pseudo-orientations."""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational

import numpy as np

from .algebra import GaussianRational, Poly, parse_constant, parse_ratfunc
from .errors import DimensionMismatch, ParseError, ZeroDirection

MEMBERSHIP_TOL = 1e-12
DIRECTION_TOL = 1e-12


@dataclass(frozen=True)
class StripSpec:
    r: float
    s: float

    def __post_init__(self):
        if not self.s > 0:
            raise ValueError("strip half-width must be positive")

    def contains(self, z) -> bool:
        z = complex(z)
        return z.real > self.r and abs(z.imag) < self.s


def strip_contains(S: StripSpec, z) -> bool:
    return S.contains(z)


# ---------------------------------------------------------------------------
# points of the plane compactified by a circle of directions
# ---------------------------------------------------------------------------

class PTildeClass(enum.Enum):
    FINITE = "Finite"
    ONE_INFINITY = "OneInfinity"
    POSITIVE_DIRECTION = "PositiveInfinityDirection"
    NONPOSITIVE_DIRECTION = "NonpositiveInfinityDirection"


@dataclass(frozen=True)
class PTildePoint:
    kind: str  # "finite" | "infinity"
    value: object

    @classmethod
    def finite(cls, z):
        return cls("finite", _scalar(z))

    @classmethod
    def at_infinity(cls, direction):
        d = _scalar(direction)
        if d == 0:
            raise ZeroDirection("direction at infinity must be nonzero")
        return cls("infinity", d)

    def same_direction(self, other: "PTildePoint") -> bool:
        """Equality up to positive real scaling (cross and dot product test)."""
        if self.kind != "infinity" or other.kind != "infinity":
            return self == other
        a, b = self.value, other.value
        if isinstance(a, GaussianRational) and isinstance(b, GaussianRational):
            cross = a.re * b.im - a.im * b.re
            dot = a.re * b.re + a.im * b.im
            return cross == 0 and dot > 0
        a, b = complex(a), complex(b)
        cross = a.real * b.imag - a.imag * b.real
        dot = a.real * b.real + a.imag * b.imag
        return abs(cross) <= DIRECTION_TOL * abs(a) * abs(b) and dot > 0


def _scalar(z):
    if isinstance(z, (GaussianRational, int, Rational)):
        return GaussianRational.coerce(z)
    if isinstance(z, str):
        return parse_constant(z)
    return complex(z)


def classify_ptilde(p: PTildePoint) -> PTildeClass:
    if p.kind == "finite":
        return PTildeClass.FINITE
    d = p.value
    if isinstance(d, GaussianRational):
        if d == 0:
            raise ZeroDirection("zero direction")
        if d.im == 0 and d.re > 0:
            return PTildeClass.ONE_INFINITY
        return PTildeClass.POSITIVE_DIRECTION if d.re > 0 else PTildeClass.NONPOSITIVE_DIRECTION
    d = complex(d)
    if d == 0:
        raise ZeroDirection("zero direction")
    scale = abs(d)
    if abs(d.imag) <= DIRECTION_TOL * scale and d.real > 0:
        return PTildeClass.ONE_INFINITY
    if d.real > DIRECTION_TOL * scale:
        return PTildeClass.POSITIVE_DIRECTION
    return PTildeClass.NONPOSITIVE_DIRECTION


def in_bcirc(p: PTildePoint) -> bool:
    return classify_ptilde(p) is not PTildeClass.NONPOSITIVE_DIRECTION


def in_bsharp(p: PTildePoint) -> bool:
    return classify_ptilde(p) in (PTildeClass.FINITE, PTildeClass.ONE_INFINITY)


# ---------------------------------------------------------------------------
# sign-condition regions
# ---------------------------------------------------------------------------

def coord_names(n: int):
    return tuple(f"x{k + 1}" for k in range(n))


def _poly_from_json(obj, n):
    names = coord_names(n)
    if isinstance(obj, str):
        rf = parse_ratfunc(obj, names)
        if not rf.is_polynomial():
            raise ParseError(f"{obj!r} is not a polynomial")
        return rf.num * rf.den.constant_value().inverse()
    if isinstance(obj, dict):
        terms = {}
        for key, c in obj.items():
            e = tuple(int(k) for k in str(key).split(",")) if str(key) else ()
            if len(e) != n:
                raise DimensionMismatch(f"exponent key {key!r} has wrong length for dim {n}")
            terms[e] = GaussianRational.coerce(Fraction(str(c)))
        return Poly(names, terms)
    raise ParseError(f"cannot read polynomial from {obj!r}")


def _poly_to_json(p: Poly):
    return {",".join(str(k) for k in e): str(c.re) for e, c in sorted(p.terms.items())}


@dataclass(frozen=True)
class Clause:
    eq: tuple = ()
    gt: tuple = ()


@dataclass(frozen=True)
class SignConditionRegion:
    """Finite union of conjunctions ``{p = 0 for p in eq, q > 0 for q in gt}``
    in coordinates ``x1..xn``; polynomials have rational coefficients."""

    dim: int
    clauses: tuple
    box: tuple | None = None  # ((lo, hi), ...) bounding box, optional

    def __post_init__(self):
        names = coord_names(self.dim)
        fixed = []
        for cl in self.clauses:
            eq = tuple(p.with_vars(names) for p in cl.eq)
            gt = tuple(p.with_vars(names) for p in cl.gt)
            for p in eq + gt:
                if not p.has_real_coefficients():
                    raise ValueError("sign conditions need real coefficients")
            fixed.append(Clause(eq, gt))
        object.__setattr__(self, "clauses", tuple(fixed))
        if self.box is not None:
            if len(self.box) != self.dim:
                raise DimensionMismatch("bounding box has wrong dimension")
            object.__setattr__(self, "box", tuple((Fraction(lo), Fraction(hi)) for lo, hi in
                                                  ((_exactish(a), _exactish(b)) for a, b in self.box)))

    @property
    def names(self):
        return coord_names(self.dim)

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        n = int(obj["dim"])
        clauses = []
        for cl in obj["clauses"]:
            clauses.append(Clause(tuple(_poly_from_json(p, n) for p in cl.get("eq", [])),
                                  tuple(_poly_from_json(p, n) for p in cl.get("gt", []))))
        box = obj.get("box")
        return cls(n, tuple(clauses), tuple(tuple(b) for b in box) if box else None)

    def to_json(self):
        out = {"dim": self.dim,
               "clauses": [{"eq": [_poly_to_json(p) for p in c.eq],
                            "gt": [_poly_to_json(p) for p in c.gt]} for c in self.clauses]}
        if self.box is not None:
            out["box"] = [[str(lo), str(hi)] for lo, hi in self.box]
        return out

    def contains(self, x) -> bool:
        x = list(x)
        if len(x) != self.dim:
            raise DimensionMismatch(f"point has {len(x)} coordinates, region has dim {self.dim}")
        exact = all(isinstance(v, (int, Rational, GaussianRational)) for v in x)
        for cl in self.clauses:
            if exact:
                ok = all(p.eval_exact(x) == 0 for p in cl.eq) and \
                    all(p.eval_exact(x).re > 0 for p in cl.gt)
            else:
                xs = [float(v) for v in x]
                ok = all(abs(complex(p.eval_numeric(*xs))) <= MEMBERSHIP_TOL for p in cl.eq) and \
                    all(complex(p.eval_numeric(*xs)).real > 0 for p in cl.gt)
            if ok:
                return True
        return False

    def contains_many(self, pts: np.ndarray) -> np.ndarray:
        """Float membership for an (m, dim) array of points."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        cols = [pts[:, k] for k in range(self.dim)]
        out = np.zeros(len(pts), dtype=bool)
        for cl in self.clauses:
            ok = np.ones(len(pts), dtype=bool)
            for p in cl.eq:
                ok &= np.abs(p.eval_numeric(*cols)) <= MEMBERSHIP_TOL
            for p in cl.gt:
                ok &= p.eval_numeric(*cols).real > 0
            out |= ok
        return out

    def is_open_description(self) -> bool:
        return all(not cl.eq for cl in self.clauses)


def _exactish(v):
    if isinstance(v, (int, Rational)):
        return Fraction(v)
    if isinstance(v, str):
        return Fraction(v)
    return Fraction(v).limit_denominator(10 ** 12)


def region_membership(R: SignConditionRegion, x) -> bool:
    return R.contains(x)


def region_intervals_1d(R: SignConditionRegion, lo=None, hi=None):
    """Open intervals making up the full-dimensional part of a 1-d region.

    Breakpoints are the real roots of every polynomial in the description;
    each gap is tested at its midpoint.
    """
    if R.dim != 1:
        raise DimensionMismatch("region_intervals_1d needs a 1-dimensional region")
    if lo is None or hi is None:
        if R.box is None:
            raise ValueError("bounding box required")
        lo, hi = (float(b) for b in R.box[0])
    cuts = {float(lo), float(hi)}
    for cl in R.clauses:
        for p in cl.gt + cl.eq:
            cs = [complex(c).real for c in p.univariate_coeffs("x1")]
            if len(cs) > 1 and any(cs[1:]):
                while cs and cs[-1] == 0:
                    cs.pop()
                for r in np.roots(cs[::-1]):
                    if abs(r.imag) < 1e-9 and lo < r.real < hi:
                        cuts.add(float(r.real))
    cuts = sorted(cuts)
    out = []
    for a, b in zip(cuts, cuts[1:]):
        if b - a <= 1e-14:
            continue
        if R.contains([(a + b) / 2]):
            if out and abs(out[-1][1] - a) < 1e-14 and R.contains([a]):
                out[-1] = (out[-1][0], b)
            else:
                out.append((a, b))
    return out


# ---------------------------------------------------------------------------
# pseudo-orientations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Piece:
    """Open parameter box with an orientation sign."""

    box: tuple  # ((lo, hi), ...)
    sign: int = 1

    @property
    def dim(self):
        return len(self.box)

    def is_empty(self):
        return any(not lo < hi for lo, hi in self.box)


def _box_intersect(a, b):
    return tuple((max(x0, y0), min(x1, y1)) for (x0, x1), (y0, y1) in zip(a, b))


@dataclass(frozen=True)
class PseudoOrientation:
    pieces: tuple = field(default_factory=tuple)

    def __post_init__(self):
        pieces = tuple(p if isinstance(p, Piece) else Piece(tuple(p[0]), p[1]) for p in self.pieces)
        pieces = tuple(Piece(tuple(tuple(iv) for iv in p.box), int(p.sign)) for p in pieces)
        dims = {p.dim for p in pieces}
        if len(dims) > 1:
            raise DimensionMismatch("pieces of mixed dimension")
        for p in pieces:
            if p.sign not in (1, -1):
                raise ValueError("orientation sign must be +1 or -1")
        for i, p in enumerate(pieces):
            for q in pieces[i + 1:]:
                if not Piece(_box_intersect(p.box, q.box)).is_empty():
                    raise ValueError("pieces overlap")
        object.__setattr__(self, "pieces", pieces)

    @classmethod
    def interval(cls, a, b, sign=1):
        return cls((Piece(((a, b),), sign),))

    @property
    def dim(self):
        return self.pieces[0].dim if self.pieces else None


def orientation_restrict(po: PseudoOrientation, sub, removed=()) -> PseudoOrientation:
    """Restrict to ``sub`` (a box, or list of boxes) and split at ``removed`` points.

    Removed points are 1-d parameter values (measure zero, so the integral is
    unchanged); for higher dimensions they are ignored.
    """
    boxes = [sub] if sub and not isinstance(sub[0][0], (tuple, list)) else list(sub)
    boxes = [tuple(tuple(iv) for iv in b) for b in boxes]
    if po.dim is not None and any(len(b) != po.dim for b in boxes):
        raise DimensionMismatch("restriction has a different dimension")
    out = []
    for p in po.pieces:
        for b in boxes:
            box = _box_intersect(p.box, b)
            if Piece(box).is_empty():
                continue
            if len(box) == 1 and removed:
                lo, hi = box[0]
                cuts = sorted(r for r in removed if lo < r < hi)
                edges = [lo] + cuts + [hi]
                for a, c in zip(edges, edges[1:]):
                    out.append(Piece(((a, c),), p.sign))
            else:
                out.append(Piece(box, p.sign))
    return PseudoOrientation(tuple(out))
