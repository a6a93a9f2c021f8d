"""Definable integrals as volumes.

``represent_volume`` turns a signed density on a 1- or 2-dimensional domain
into two regions under the graph of |a| (U_+ and U_-), whose volume
difference is the integral. ``combine_signed_volumes`` merges a signed list
of regions into one region on a mesh by translating the pieces apart and
cancelling cubes. ``grid_volume`` gives inner and outer Jordan bounds.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq

from . import quadrature
from .algebra import Poly, RatFunc, compile_numeric
from .errors import DensityUndefined, DimensionMismatch, NegativeTotal, NotStabilized, UnboundedDomain
from .kernels import classify_cells, pack_region
from .semialg import Clause, PseudoOrientation, SignConditionRegion, region_intervals_1d

QUAD_TOL = 1e-11


# ---------------------------------------------------------------------------
# domains and graph regions
# ---------------------------------------------------------------------------

@dataclass
class Chart2D:
    """x1 in (lo, hi), lower(x1) < x2 < upper(x1), with an orientation sign."""

    lo: float
    hi: float
    lower: str
    upper: str
    sign: int = 1


@dataclass
class DensityDomain:
    dim: int
    density: str
    region: SignConditionRegion | None = None
    orientation: PseudoOrientation | None = None
    charts: list = field(default_factory=list)

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise DimensionMismatch("only dimensions 1 and 2 are supported")
        names = ("x1",) if self.dim == 1 else ("x1", "x2")
        self._fn, _ = compile_numeric(self.density, names)
        if self.dim == 1:
            if self.region is None:
                raise ValueError("a 1-d domain needs a region")
            if self.region.box is None:
                raise UnboundedDomain("domain has no bounding box")
            if self.orientation is None:
                lo, hi = self.region.box[0]
                self.orientation = PseudoOrientation.interval(float(lo), float(hi))
        elif not self.charts:
            raise ValueError("a 2-d domain needs graph charts")

    def a(self, *xs):
        with np.errstate(all="ignore"):
            val = np.asarray(self._fn(*xs))
        if np.iscomplexobj(val):
            if np.any(np.abs(val.imag) > 1e-12 * np.maximum(1.0, np.abs(val.real))):
                raise DensityUndefined("density is not real on the domain")
            val = val.real
        if not np.all(np.isfinite(val)):
            raise DensityUndefined("density is not finite on the domain")
        return val

    @classmethod
    def from_json(cls, obj, density=None):
        if isinstance(obj, str):
            obj = json.loads(obj)
        dim = int(obj.get("dim", 1))
        density = density or obj.get("density")
        if density is None:
            raise ValueError("missing density")
        if dim == 1:
            region = SignConditionRegion.from_json(obj["region"])
            po = None
            if "orientation" in obj:
                po = PseudoOrientation(tuple(((tuple(map(float, b)),), int(s)) for b, s in obj["orientation"]))
            return cls(1, density, region, po)
        charts = [Chart2D(float(Fraction(str(c["x1"][0]))), float(Fraction(str(c["x1"][1]))),
                          str(c["lower"]), str(c["upper"]), int(c.get("sign", 1))) for c in obj["charts"]]
        return cls(2, density, charts=charts)


@dataclass
class GraphRegion:
    """{(y, z) : y in base, 0 < z < |a(y)|}, with base a union of pieces."""

    sign: int
    base: list  # 1-d: [(lo, hi)]; 2-d: [(lo, hi, lower, upper)]
    volume: float
    abs_err: float

    def describe(self):
        return {"sign": "+" if self.sign > 0 else "-", "base": [list(map(_num, b)) for b in self.base],
                "height": "|a(y)|", "volume": self.volume, "abs_err": self.abs_err}


def _num(x):
    return x if isinstance(x, (int, float, str)) else float(x)


@dataclass
class VolumeRepresentation:
    U_plus: GraphRegion
    U_minus: GraphRegion

    @property
    def value(self):
        return self.U_plus.volume - self.U_minus.volume

    @property
    def abs_err(self):
        return self.U_plus.abs_err + self.U_minus.abs_err


def _sign_changes(fn, lo, hi, n=257):
    xs = np.linspace(lo, hi, n)
    ys = fn(xs)
    roots = []
    for a, b, ya, yb in zip(xs[:-1], xs[1:], ys[:-1], ys[1:]):
        if ya == 0 and a > lo:
            roots.append(a)
        elif ya * yb < 0:
            roots.append(brentq(lambda x: float(fn(np.array([x]))[0]), a, b, xtol=1e-14))
    return sorted(set(roots))


def _split_by_sign(fn, lo, hi):
    """Subintervals of (lo, hi) with the sign of fn on each."""
    cuts = [lo] + [r for r in _sign_changes(fn, lo, hi) if lo < r < hi] + [hi]
    out = []
    for a, b in zip(cuts, cuts[1:]):
        if b - a <= 1e-15:
            continue
        mid = fn(np.array([(a + b) / 2]))[0]
        s = 1 if mid > 0 else (-1 if mid < 0 else 0)
        if s:
            out.append((a, b, s))
    return out


def represent_volume(D: DensityDomain, tol: float = QUAD_TOL) -> VolumeRepresentation:
    plus_base, minus_base = [], []
    vp = vm = ep = em = 0.0
    if D.dim == 1:
        intervals = region_intervals_1d(D.region)
        for piece in D.orientation.pieces:
            (plo, phi), = piece.box
            for lo, hi in intervals:
                a, b = max(lo, plo), min(hi, phi)
                if not a < b:
                    continue
                for s0, s1, s in _split_by_sign(D.a, a, b):
                    v, e, _ = quadrature.integrate(lambda x: np.abs(D.a(x)), s0, s1, tol)
                    if s * piece.sign > 0:
                        plus_base.append((s0, s1))
                        vp, ep = vp + v.real, ep + e
                    else:
                        minus_base.append((s0, s1))
                        vm, em = vm + v.real, em + e
    else:
        for ch in D.charts:
            lower, _ = compile_numeric(ch.lower, ("x1",))
            upper, _ = compile_numeric(ch.upper, ("x1",))
            pos, neg = _chart_volumes(D, ch, lower, upper, tol)
            if ch.sign < 0:
                pos, neg = neg, pos
            vp, ep = vp + pos[0], ep + pos[1]
            vm, em = vm + neg[0], em + neg[1]
            plus_base.append((ch.lo, ch.hi, ch.lower, ch.upper))
            minus_base.append((ch.lo, ch.hi, ch.lower, ch.upper))
    return VolumeRepresentation(GraphRegion(1, plus_base, vp, ep), GraphRegion(-1, minus_base, vm, em))


def _chart_volumes(D, ch, lower, upper, tol):
    """(integral of a^+, integral of a^-) over one chart, by nested quadrature."""
    def inner(x1, which):
        out = np.empty(len(x1))
        for k, x in enumerate(np.atleast_1d(x1)):
            g0, g1 = float(np.asarray(lower(np.array([x])))[0]), float(np.asarray(upper(np.array([x])))[0])
            if not g0 < g1:
                out[k] = 0.0
                continue
            fn = lambda y, x=x: D.a(np.full_like(y, x), y)  # noqa: E731
            total = 0.0
            for s0, s1, s in _split_by_sign(fn, g0, g1):
                if s == which:
                    v, _, _ = quadrature.integrate(lambda y: np.abs(fn(y)), s0, s1, tol * 1e-2)
                    total += v.real
            out[k] = total
        return out

    vp, ep, _ = quadrature.integrate(lambda x: inner(x, 1), ch.lo, ch.hi, tol)
    vm, em, _ = quadrature.integrate(lambda x: inner(x, -1), ch.lo, ch.hi, tol)
    return (vp.real, ep), (vm.real, em)


# ---------------------------------------------------------------------------
# mesh counting
# ---------------------------------------------------------------------------

def _mesh(box, eps: Fraction):
    origin = [math.floor(Fraction(lo) / eps) * eps for lo, _ in box]
    counts = [max(1, math.ceil((Fraction(hi) - o) / eps)) for (_, hi), o in zip(box, origin)]
    return origin, counts


def grid_cells(R: SignConditionRegion, eps, backend=None):
    eps = Fraction(eps)
    if R.box is None:
        raise UnboundedDomain("region has no bounding box")
    origin, counts = _mesh(R.box, eps)
    inside, meets = classify_cells([float(o) for o in origin], eps, counts, pack_region(R), backend)
    return origin, counts, inside, meets


def grid_volume(R: SignConditionRegion, eps, backend=None):
    """(lower, upper) Jordan bounds from inside / meeting cell counts."""
    eps = Fraction(eps)
    if not R.clauses:
        return 0.0, 0.0
    _, _, inside, meets = grid_cells(R, eps, backend)
    cell = float(eps) ** R.dim
    return int(inside.sum()) * cell, int(meets.sum()) * cell


def translate_region(R: SignConditionRegion, shift) -> SignConditionRegion:
    """Region moved by ``shift`` (exact, one offset per coordinate)."""
    shift = [Fraction(s) for s in shift]
    names = R.names
    sub = {v: Poly(names, {tuple(int(j == k) for j in range(R.dim)): 1,
                            (0,) * R.dim: -s})
           for k, (v, s) in enumerate(zip(names, shift))}
    clauses = []
    for cl in R.clauses:
        clauses.append(Clause(tuple(_subs_poly(p, sub) for p in cl.eq),
                              tuple(_subs_poly(p, sub) for p in cl.gt)))
    box = None
    if R.box is not None:
        box = tuple((lo + s, hi + s) for (lo, hi), s in zip(R.box, shift))
    return SignConditionRegion(R.dim, tuple(clauses), box)


def _subs_poly(p, sub):
    out = p.subs(sub)
    if isinstance(out, RatFunc):
        return out.num
    if isinstance(out, Poly):
        return out
    return Poly.const(out, p.vars)


@dataclass
class CombineResult:
    volume: float
    lower: float
    upper: float
    error_bound: float
    global_sign: int
    counts: dict
    translates: list  # (sign, translated region JSON)
    removed_cells: int
    certified: bool
    diagnostics: list = field(default_factory=list)


def combine_signed_volumes(items, eps, allow_flip: bool = True, backend=None) -> CombineResult:
    """Merge [(sign, region), ...] into one region whose volume approximates the signed sum.

    Positive regions are placed side by side along x1 (and negatives likewise),
    all on one eps-mesh; each cell meeting a negative region is paid for by a
    cell inside a positive one (first found). Bounds:
    (N+in - N-meet) eps^d <= signed sum <= (N+meet - N-in) eps^d.
    """
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if not items:
        return CombineResult(0.0, 0.0, 0.0, 0.0, 1, {}, [], 0, True)
    dims = {R.dim for _, R in items}
    if len(dims) != 1:
        raise DimensionMismatch("regions of different dimensions")
    d = dims.pop()
    for _, R in items:
        if R.box is None:
            raise UnboundedDomain("every region needs a bounding box")
    groups = {1: [], -1: []}
    for s, R in items:
        groups[1 if s > 0 else -1].append(R)
    translates = []
    cursor = Fraction(0)
    flags = {1: [], -1: []}
    for s in (1, -1):
        for R in groups[s]:
            origin, _ = _mesh(R.box, eps)
            shift = [cursor - origin[0]] + [Fraction(0)] * (d - 1)
            moved = translate_region(R, shift)
            o2, counts = _mesh(moved.box, eps)
            cursor = o2[0] + counts[0] * eps + eps
            # count on the original: shifts are mesh multiples, and interval
            # bounds are tighter on the unshifted polynomials
            _, _, inside, meets = grid_cells(R, eps, backend)
            flags[s].append((inside, meets))
            translates.append((s, moved.to_json()))
    n = {f"{'plus' if s > 0 else 'minus'}_{kind}": int(sum(f[i].sum() for f in flags[s]))
         for s in (1, -1) for i, kind in ((0, "in"), (1, "meet"))}
    cell = float(eps) ** d
    lower = (n["plus_in"] - n["minus_meet"]) * cell
    upper = (n["plus_meet"] - n["minus_in"]) * cell
    sign = 1
    diags = []
    certified = n["plus_in"] >= n["minus_meet"]
    removed = n["minus_meet"] if certified else 0
    if not certified and n["minus_in"] >= n["plus_meet"]:
        if not allow_flip:
            raise NegativeTotal("signed sum is negative")
        sign = -1
        certified = True
        removed = n["plus_meet"]
        diags.append("signed sum is negative; reporting the volume of the flipped combination")
    if not certified:
        diags.append("mesh too coarse to certify cancellation; bounds still hold")
    mid = 0.5 * (lower + upper)
    return CombineResult(sign * mid, lower, upper, 0.5 * (upper - lower),
                         sign, n, translates, removed, certified, diags)


def combine_until(items, eps0, target_slack: float, max_halvings: int = 8, backend=None):
    """Halve eps until the bound width drops below ``target_slack``."""
    eps = Fraction(eps0)
    res = None
    for _ in range(max_halvings + 1):
        res = combine_signed_volumes(items, eps, backend=backend)
        if res.upper - res.lower <= target_slack:
            return res, eps
        eps /= 2
    raise NotStabilized(f"bounds still {res.upper - res.lower:.3g} wide at eps={eps * 2}")
