"""Exponential period integrals over parametrised chains.

An integral ``int_G exp(-f) omega`` is reduced to a complex integrand of one
real parameter. Unbounded ends are cut at a point ``T`` chosen from a
rigorous envelope of the integrand, so the reported ``abs_err`` is the
quadrature estimate plus a proven tail bound.
"""
from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy import special

from . import quadrature
from .algebra import (
    GaussianRational,
    Poly,
    RatForm,
    RatFunc,
    parse_constant,
    parse_form,
    parse_ratfunc,
    real_imag_split,
)
from .errors import (
    DimensionMismatch,
    EndpointNotMarked,
    ParseError,
    PoleOnSimplex,
    QuadratureFailure,
    RejectedPath,
)
from .semialg import PTildeClass, PTildePoint, PseudoOrientation, StripSpec, classify_ptilde

COEFF_TOL = 1e-13


# ---------------------------------------------------------------------------
# points and paths
# ---------------------------------------------------------------------------

_ROOT = re.compile(r"^\s*root\(\s*(-?\d+)\s*/\s*(\d+)\s*\)\s*$")


def parse_point(text):
    """Exact Gaussian rational when possible, else a complex float.

    ``root(m/n)`` denotes exp(2 pi i m / n).
    """
    if isinstance(text, (GaussianRational, complex, float, int)):
        return text if not isinstance(text, (int,)) else GaussianRational(text)
    m = _ROOT.match(str(text))
    if m:
        k, n = int(m.group(1)), int(m.group(2))
        return root_of_unity(k, n)
    return parse_constant(str(text))


def root_of_unity(m: int, n: int):
    """exp(2 pi i m/n), exact when it lies in Q(i)."""
    if (4 * m) % n == 0:
        quarter = ((4 * m) // n) % 4
        return [GaussianRational(1), GaussianRational(0, 1), GaussianRational(-1),
                GaussianRational(0, -1)][quarter]
    return cmath.exp(2j * math.pi * m / n)


def _is_exact(x):
    return isinstance(x, GaussianRational)


@dataclass(frozen=True)
class PathPiece:
    """t in [lo, hi] (hi may be inf) mapped by component functions of t."""

    lo: float
    hi: float
    comps: tuple  # exact RatFuncs in "t", or numeric coefficient arrays
    exact: bool


@dataclass(frozen=True)
class PathSpec:
    kind: str
    data: tuple

    # constructors -----------------------------------------------------------
    @classmethod
    def ray(cls, base, direction):
        base, direction = parse_point(base), parse_point(direction)
        if complex(direction) == 0:
            raise ValueError("ray direction must be nonzero")
        return cls("ray", (base, direction))

    @classmethod
    def segment(cls, a, b):
        return cls("segment", (parse_point(a), parse_point(b)))

    @classmethod
    def polyline(cls, points):
        pts = tuple(parse_point(p) for p in points)
        if len(pts) < 2:
            raise ValueError("a polyline needs at least two points")
        return cls("polyline", pts)

    @classmethod
    def param(cls, comps, lo=0, hi=1):
        comps = tuple(parse_ratfunc(c, ("t",)) if isinstance(c, str) else c.with_vars(("t",))
                      for c in comps)
        lo = float(lo)
        hi = math.inf if str(hi).strip().lower() in ("inf", "oo") else float(hi)
        if not lo < hi:
            raise ValueError("parameter interval must be nonempty")
        return cls("param", (comps, lo, hi))

    @classmethod
    def parse(cls, text: str):
        kind, _, rest = text.partition(":")
        kind = kind.strip().lower()
        if kind == "ray":
            parts = rest.split(":")
            if len(parts) != 2:
                raise ParseError("ray syntax is ray:BASE:DIRECTION")
            return cls.ray(*parts)
        if kind == "segment":
            parts = rest.split(":")
            if len(parts) != 2:
                raise ParseError("segment syntax is segment:A:B")
            return cls.segment(*parts)
        if kind == "polyline":
            return cls.polyline(rest.split(";"))
        if kind == "param":
            parts = rest.split(":")
            if len(parts) != 3:
                raise ParseError("param syntax is param:EXPR1,EXPR2,...:LO:HI")
            return cls.param(parts[0].split(","), parts[1], parts[2])
        raise ParseError(f"unknown path kind {kind!r}")

    # geometry ---------------------------------------------------------------
    @property
    def start(self):
        if self.kind in ("ray", "segment", "polyline"):
            return self.data[0]
        comps, lo, _ = self.data
        return tuple(c.eval_exact([GaussianRational(_frac_of(lo))]) for c in comps)

    @property
    def end(self):
        """End point, or None for an unbounded end."""
        if self.kind == "ray":
            return None
        if self.kind in ("segment", "polyline"):
            return self.data[-1]
        comps, _, hi = self.data
        if math.isinf(hi):
            return None
        return tuple(c.eval_exact([GaussianRational(_frac_of(hi))]) for c in comps)

    @property
    def n_components(self):
        return len(self.data[0]) if self.kind == "param" else 1

    def pieces(self):
        if self.kind == "ray":
            b, d = self.data
            return [_affine_piece(b, d, 0.0, math.inf)]
        if self.kind == "segment":
            a, b = self.data
            return [_affine_piece(a, b - a, 0.0, 1.0)]
        if self.kind == "polyline":
            return [_affine_piece(p, q - p, 0.0, 1.0) for p, q in zip(self.data, self.data[1:])]
        comps, lo, hi = self.data
        return [PathPiece(lo, hi, comps, True)]

    def __str__(self):
        if self.kind in ("ray", "segment"):
            return f"{self.kind}:{self.data[0]}:{self.data[1]}"
        if self.kind == "polyline":
            return "polyline:" + ";".join(str(p) for p in self.data)
        comps, lo, hi = self.data
        return "param:" + ",".join(str(c) for c in comps) + f":{lo}:{hi}"


def _frac_of(x):
    from fractions import Fraction
    return Fraction(x).limit_denominator(10 ** 12) if isinstance(x, float) else Fraction(x)


def _affine_piece(base, direction, lo, hi):
    if _is_exact(base) and _is_exact(direction):
        comp = RatFunc(Poly(("t",), {(0,): base, (1,): direction}))
        return PathPiece(lo, hi, (comp,), True)
    return PathPiece(lo, hi, (np.array([complex(base), complex(direction)]),), False)


# ---------------------------------------------------------------------------
# pulling rational data back to the parameter line
# ---------------------------------------------------------------------------

def _trim(c):
    c = np.atleast_1d(np.asarray(c, dtype=complex))
    scale = np.max(np.abs(c)) if c.size else 0.0
    k = len(c)
    while k > 1 and abs(c[k - 1]) <= COEFF_TOL * scale:
        k -= 1
    return c[:k]


def _coeffs_exact(p: Poly):
    return np.array([complex(c) for c in p.with_vars(("t",)).univariate_coeffs("t")] or [0j])


def _poly_pull_numeric(p: Poly, comps):
    out = np.zeros(1, dtype=complex)
    for e, c in p.terms.items():
        term = np.array([complex(c)])
        for comp, k in zip(comps, e):
            for _ in range(k):
                term = npoly.polymul(term, comp)
        out = npoly.polyadd(out, term)
    return out


@dataclass
class UniRat:
    """Numeric univariate rational function num/den in the parameter t."""

    num: np.ndarray
    den: np.ndarray

    def __post_init__(self):
        self.num = _trim(self.num)
        self.den = _trim(self.den)

    def __call__(self, t):
        return npoly.polyval(t, self.num) / npoly.polyval(t, self.den)

    @property
    def deg_num(self):
        return -1 if not np.any(self.num) else len(self.num) - 1

    @property
    def deg_den(self):
        return len(self.den) - 1

    @property
    def order(self):
        """Growth exponent at +inf (numerator degree minus denominator degree)."""
        return self.deg_num - self.deg_den if self.deg_num >= 0 else None

    @property
    def lead(self):
        return self.num[-1] / self.den[-1]


def pull_function(F: RatFunc, piece: PathPiece, variables) -> UniRat:
    F = F.with_vars(variables)
    if piece.exact:
        sub = {v: c for v, c in zip(variables, piece.comps)}
        G = F.subs(sub) if variables else F
        G = RatFunc.coerce(G).with_vars(("t",)) if not isinstance(G, RatFunc) else G.with_vars(("t",))
        return UniRat(_coeffs_exact(G.num), _coeffs_exact(G.den))
    return UniRat(_poly_pull_numeric(F.num, piece.comps), _poly_pull_numeric(F.den, piece.comps))


def pull_form(omega: RatForm, piece: PathPiece, variables) -> UniRat:
    """Coefficient G(t) with gamma^* omega = G(t) dt."""
    omega = omega.with_vars(variables)
    if omega.degree != 1:
        raise DimensionMismatch("path integrals need a 1-form")
    if piece.exact:
        total = RatFunc.coerce(0, ("t",))
        sub = {v: c for v, c in zip(variables, piece.comps)}
        for (j,), a in omega.terms.items():
            aj = RatFunc.coerce(a.subs(sub)).with_vars(("t",))
            total = total + aj * piece.comps[j].derivative("t")
        return UniRat(_coeffs_exact(total.num), _coeffs_exact(total.den))
    num, den = np.zeros(1, complex), np.ones(1, complex)
    for (j,), a in omega.terms.items():
        an = _poly_pull_numeric(a.num, piece.comps)
        ad = _poly_pull_numeric(a.den, piece.comps)
        an = npoly.polymul(an, npoly.polyder(piece.comps[j]))
        num = npoly.polyadd(npoly.polymul(num, ad), npoly.polymul(an, den))
        den = npoly.polymul(den, ad)
    return UniRat(num, den)


def _common_vars(f: RatFunc, omega: RatForm, path: PathSpec):
    names = list(omega.vars)
    for v in f.vars:
        if v not in names:
            names.append(v)
    if len(names) > path.n_components:
        if path.n_components == 1 and len(names) == 0:
            return ("z",)
        raise DimensionMismatch(f"path has {path.n_components} components but data uses {names}")
    while len(names) < path.n_components:
        names.append(f"_u{len(names)}")
    return tuple(names)


def _real_roots_in(den: np.ndarray, lo: float, hi: float):
    den = _trim(den)
    if len(den) <= 1:
        return []
    roots = np.roots(den[::-1])
    scale = max(1.0, *(abs(r) for r in roots))
    return [r.real for r in roots if abs(r.imag) <= 1e-9 * scale and lo - 1e-12 <= r.real <= hi + 1e-12]


# ---------------------------------------------------------------------------
# properness
# ---------------------------------------------------------------------------

@dataclass
class ProperVerdict:
    kind: str  # "OkStrip" | "OkBcirc" | "Reject"
    strip: StripSpec | None = None
    reason: str = ""
    diagnostics: list = field(default_factory=list)

    @property
    def ok(self):
        return self.kind != "Reject"


def _sample_grid(lo, hi):
    if math.isinf(hi):
        return np.concatenate([np.linspace(lo, lo + 10.0, 400), lo + np.geomspace(10.0, 1e8, 400)])
    return np.linspace(lo, hi, 801)


def properness_check(f, path: PathSpec, omega=None) -> ProperVerdict:
    f = parse_ratfunc(f) if isinstance(f, str) else RatFunc.coerce(f)
    if isinstance(omega, str):
        omega = parse_form(omega)
    omega = omega if omega is not None else RatForm(1, f.vars or ("z",), {})
    variables = _common_vars(f, omega, path)
    diags = []
    re_min, im_max = math.inf, 0.0
    strip_possible = True
    for piece in path.pieces():
        F = pull_function(f, piece, variables)
        poles = _real_roots_in(F.den, piece.lo, piece.hi if not math.isinf(piece.hi) else 1e300)
        if poles:
            return ProperVerdict("Reject", reason=f"f has a pole on the path at parameter t={poles[0]:.6g}")
        samples = F(_sample_grid(piece.lo, piece.hi))
        re_min = min(re_min, float(np.min(samples.real)))
        im_max = max(im_max, float(np.max(np.abs(samples.imag))))
        if not math.isinf(piece.hi):
            continue
        q = F.order
        if q is None or q <= 0:
            limit = 0j if q is None or q < 0 else complex(F.lead)
            lo_v = F(np.array([piece.lo]))[0]
            return ProperVerdict(
                "Reject",
                reason=(f"f is not proper on the path: along the unbounded end f tends to the "
                        f"finite value {limit:.6g}, so the image f(G) (starting at {lo_v:.6g}) "
                        "is not closed"),
            )
        direction = complex(F.lead)
        cls = classify_ptilde(PTildePoint.at_infinity(direction))
        if cls is PTildeClass.NONPOSITIVE_DIRECTION:
            return ProperVerdict(
                "Reject",
                reason=(f"limit direction {direction:.6g}*inf of f along the path is not in B°: "
                        "the path is not a cycle for rapid decay homology"),
            )
        if cls is PTildeClass.ONE_INFINITY:
            # Im f bounded iff deg Im(N conj D) <= deg |D|^2 along real t
            top = npoly.polymul(F.num, np.conj(F.den))
            im_part = _trim(top.imag.astype(complex))
            bottom = _trim(npoly.polymul(F.den, np.conj(F.den)).real.astype(complex))
            deg_im = len(im_part) - 1 if np.any(im_part) else -1
            if deg_im > len(bottom) - 1:
                strip_possible = False
                diags.append("f tends to 1inf but Im f is unbounded along the path; "
                             "accepted as a B° cycle, not a strip")
        else:
            strip_possible = False
            diags.append(f"limit direction {direction:.6g} has positive real part but is not 1inf")
    if strip_possible:
        strip = StripSpec(math.floor(re_min) - 1.0, math.ceil(im_max) + 1.0)
        diags.append("strip witness from sampled values with unit margin")
        return ProperVerdict("OkStrip", strip=strip, diagnostics=diags)
    return ProperVerdict("OkBcirc", diagnostics=diags)


# ---------------------------------------------------------------------------
# integration
# ---------------------------------------------------------------------------

@dataclass
class PeriodValue:
    value: complex
    abs_err: float
    verdict: str = "Converged"  # or "Rejected"
    reason: str = ""
    diagnostics: list = field(default_factory=list)

    @property
    def converged(self):
        return self.verdict == "Converged"

    def to_json(self):
        return {"re": self.value.real, "im": self.value.imag, "abs_err": self.abs_err,
                "verdict": self.verdict if not self.reason else f"{self.verdict}({self.reason})"}


def _envelope_radius(p: np.ndarray, delta: float):
    """R with |p(t) - p_d t^d| <= delta |p_d| t^d for all t >= R."""
    p = _trim(p)
    d = len(p) - 1
    if d <= 0:
        return 1.0
    lower = float(np.sum(np.abs(p[:-1])))
    return max(1.0, lower / (delta * abs(p[-1])))


def tail_bound(F: UniRat, G: UniRat, T: float):
    """Upper bound for int_T^inf |exp(-F) G| dt, or None when no bound applies.

    Valid once T exceeds the envelope radius returned by ``tail_start``.
    """
    q = F.order
    L = complex(F.lead)
    if q is None or q <= 0 or L.real <= 0:
        return None
    if G.deg_num < 0:
        return 0.0
    m = G.order
    c = L.real / 2.0
    Gl = abs(complex(G.lead))
    if m >= 0:
        a = (m + 1) / q
        return 3.0 * Gl / q * c ** (-a) * special.gammaincc(a, c * T ** q) * special.gamma(a)
    a = 1.0 / q
    return 3.0 * Gl * T ** m / q * c ** (-a) * special.gammaincc(a, c * T ** q) * special.gamma(a)


def tail_start(F: UniRat, G: UniRat):
    L = complex(F.lead)
    delta = math.cos(cmath.phase(L)) / 8.0
    R = max(_envelope_radius(F.num, delta), _envelope_radius(F.den, delta))
    if G.deg_num >= 0:
        R = max(R, _envelope_radius(G.num, 0.125), _envelope_radius(G.den, 0.125))
    return R


def _integrand(F: UniRat, G: UniRat):
    def h(t):
        with np.errstate(over="ignore", invalid="ignore"):
            return np.exp(-F(t)) * G(t)
    return h


def _integrate_piece(F, G, piece, tol, forced):
    diags = []
    h = _integrand(F, G)
    if not math.isinf(piece.hi):
        v, e, _ = quadrature.integrate(h, piece.lo, piece.hi, tol)
        return v, e, diags
    bound = tail_bound(F, G, 1.0)
    if bound is not None:
        T = max(tail_start(F, G), piece.lo + 1.0)
        tail = tail_bound(F, G, T)
        steps = 0
        while tail > tol / 2:
            T *= 1.25
            tail = tail_bound(F, G, T)
            steps += 1
            if steps > 400:
                raise QuadratureFailure("tail bound does not fall below tolerance")
        v, e, _ = quadrature.integrate(h, piece.lo, T, tol / 2)
        diags.append(f"truncated at T={T:.6g} with tail bound {tail:.3g}")
        return v, e + tail, diags
    if not forced:
        raise QuadratureFailure("no decay along the unbounded end")
    # non-decaying end, forced: map [T0, inf) onto (0, 1] by t = T0/s
    T0 = max(1.0, piece.lo + 1.0)
    v1, e1, _ = quadrature.integrate(h, piece.lo, T0, tol / 2)

    def hs(s):
        return h(T0 / s) * T0 / (s * s)

    v2, e2, _ = quadrature.integrate(hs, 0.0, 1.0, tol / 2, max_panels=2000)
    diags.append(f"forced evaluation: end mapped by t={T0:g}/s; no tail bound applies")
    return v1 + v2, e1 + e2, diags


def integrate_path(f, omega, path, tol: float = 1e-10, force: bool = False) -> PeriodValue:
    """int_path exp(-f) omega with an absolute error estimate."""
    f = parse_ratfunc(f) if isinstance(f, str) else RatFunc.coerce(f)
    omega = parse_form(omega) if isinstance(omega, str) else omega
    path = PathSpec.parse(path) if isinstance(path, str) else path
    verdict = properness_check(f, path, omega)
    if not verdict.ok and not force:
        raise RejectedPath(verdict.reason)
    variables = _common_vars(f, omega, path)
    if omega.degree == 0 and omega.is_zero():
        omega = RatForm(1, variables, {})
    total, err = 0j, 0.0
    diags = list(verdict.diagnostics)
    pieces = path.pieces()
    for piece in pieces:
        F = pull_function(f, piece, variables)
        G = pull_form(omega, piece, variables)
        if _real_roots_in(G.den, piece.lo, piece.hi if not math.isinf(piece.hi) else 1e300):
            raise RejectedPath("omega has a pole on the path")
        v, e, d = _integrate_piece(F, G, piece, tol / len(pieces), force or not verdict.ok)
        total += v
        err += e
        diags.extend(d)
    if verdict.ok:
        return PeriodValue(complex(total), float(err), "Converged", "", diags)
    return PeriodValue(complex(total), float(err), "Rejected", verdict.reason, diags)


def integrate_oriented(f, omega, comps, po: PseudoOrientation, tol: float = 1e-10) -> PeriodValue:
    """Signed sum of integrals over the pieces of a pseudo-orientation.

    ``comps`` parametrise the domain by t; each piece is a parameter interval.
    """
    total, err, diags = 0j, 0.0, []
    n = max(1, len(po.pieces))
    for p in po.pieces:
        (lo, hi), = p.box
        val = integrate_path(f, omega, PathSpec.param(comps, lo, hi), tol / n)
        total += p.sign * val.value
        err += val.abs_err
        diags.extend(val.diagnostics)
    return PeriodValue(complex(total), err, "Converged", "", diags)


# ---------------------------------------------------------------------------
# relative pairing, Stokes, period matrices
# ---------------------------------------------------------------------------

def _same_point(a, b):
    if _is_exact(a) and _is_exact(b):
        return a == b
    return abs(complex(a) - complex(b)) <= 1e-12 * max(1.0, abs(complex(a)))


def boundary_points(path: PathSpec):
    """Finite endpoints with multiplicities: end +1, start -1."""
    out = []
    if path.end is not None:
        out.append((path.end, 1))
    out.append((path.start, -1))
    return out


def pair_relative(f, omega_X, a: dict, path, Y, tol: float = 1e-10) -> PeriodValue:
    """Pairing of a relative cocycle (omega_X, a) with a chain ending in Y or at 1inf.

    value = int_path exp(-f) omega_X + sum_y mult_y exp(-f(y)) a(y), where the
    start point has multiplicity -1; for a ray from y this is
    ``int - exp(-f(y)) a(y)``.
    """
    f = parse_ratfunc(f) if isinstance(f, str) else RatFunc.coerce(f)
    omega_X = parse_form(omega_X) if isinstance(omega_X, str) else omega_X
    path = PathSpec.parse(path) if isinstance(path, str) else path
    Y = [parse_point(y) for y in Y]
    a_pts = [(parse_point(k), complex(parse_constant(v)) if isinstance(v, str) else complex(v))
             for k, v in (a.items() if isinstance(a, dict) else a)]
    for y, _ in a_pts:
        if not any(_same_point(y, z) for z in Y):
            raise EndpointNotMarked(f"cochain value given at unmarked point {y}")
    val = integrate_path(f, omega_X, path, tol)
    total = val.value
    for pt, mult in boundary_points(path):
        pt0 = pt[0] if isinstance(pt, tuple) else pt
        if not any(_same_point(pt0, z) for z in Y):
            raise EndpointNotMarked(f"chain endpoint {pt0} is not a marked point")
        ay = next((v for y, v in a_pts if _same_point(y, pt0)), 0j)
        if ay:
            fy = complex(f.eval_numeric(complex(pt0))) if f.vars else complex(f.num.constant_value())
            total += mult * cmath.exp(-fy) * ay
    return PeriodValue(complex(total), val.abs_err, val.verdict, val.reason, val.diagnostics)


def _as_real_plane(f: RatFunc, omega: RatForm):
    """Rewrite data in the holomorphic coordinate z as data in x1, x2."""
    if tuple(omega.vars) == ("z",) or (tuple(f.vars) == ("z",) and not omega.vars):
        xy = ("x1", "x2")
        zsub = RatFunc(Poly(xy, {(1, 0): 1, (0, 1): GaussianRational(0, 1)}))
        fz = f.with_vars(("z",)).subs({"z": zsub}).with_vars(xy) if f.vars else RatFunc.coerce(f).with_vars(xy)
        terms = {}
        if omega.degree == 1 and (0,) in omega.terms:
            a = RatFunc.coerce(omega.terms[(0,)].subs({"z": zsub})).with_vars(xy)
            terms = {(0,): a, (1,): a * GaussianRational(0, 1)}
        return RatFunc.coerce(fz).with_vars(xy), RatForm(1, xy, terms)
    xy = ("x1", "x2")
    return f.with_vars(xy), omega.with_vars(xy)


def stokes_residual(vertices, omega, f, n: int = 24, tol: float = 1e-12) -> float:
    """|int_sigma exp(-f) d_f omega - int_{boundary sigma} exp(-f) omega|.

    ``vertices`` are three points of R^2 (pairs) or of C (complex numbers);
    the boundary is sum_i (-1)^i (face without vertex i).
    """
    f = parse_ratfunc(f) if isinstance(f, str) else RatFunc.coerce(f)
    omega = parse_form(omega) if isinstance(omega, str) else omega
    verts = [np.array([complex(v).real, complex(v).imag]) if not isinstance(v, (tuple, list, np.ndarray))
             else np.array([float(c) for c in v]) for v in vertices]
    if len(verts) != 3:
        raise DimensionMismatch("a 2-simplex has three vertices")
    if omega.is_zero():
        return 0.0
    f2, w2 = _as_real_plane(f, omega)
    from .algebra import d_f_apply
    top = d_f_apply(w2, f2)
    c12 = top.coefficient((0, 1))
    v0, v1, v2 = verts
    e1, e2 = v1 - v0, v2 - v0
    det = e1[0] * e2[1] - e1[1] * e2[0]

    def pts(u, v):
        return v0[0] + u * e1[0] + v * e2[0], v0[1] + u * e1[1] + v * e2[1]

    # pole check on a dense sample including vertices
    uu, vv = np.meshgrid(np.linspace(0, 1, 41), np.linspace(0, 1, 41))
    mask = uu + vv <= 1
    X, Yc = pts(uu[mask], vv[mask])
    for R in (f2, c12, *w2.terms.values()):
        den = R.den.eval_numeric(X, Yc)
        scale = max(1.0, float(np.max(np.abs(den))))
        if np.min(np.abs(den)) <= 1e-9 * scale:
            raise PoleOnSimplex("a denominator vanishes on the simplex")

    def area_integrand(u, v):
        x, y = pts(u, v)
        return np.exp(-f2.eval_numeric(x, y)) * c12.eval_numeric(x, y) * det

    lhs, _ = quadrature.gauss_legendre_triangle(area_integrand, n)
    faces = [(v1, v2), (v0, v2), (v0, v1)]
    rhs = 0j
    a1 = w2.coefficient((0,))
    a2 = w2.coefficient((1,))
    for i, (p, q) in enumerate(faces):
        dv = q - p

        def line(t, p=p, dv=dv):
            x, y = p[0] + t * dv[0], p[1] + t * dv[1]
            return np.exp(-f2.eval_numeric(x, y)) * (a1.eval_numeric(x, y) * dv[0] + a2.eval_numeric(x, y) * dv[1])

        val, _, _ = quadrature.integrate(line, 0.0, 1.0, tol)
        rhs += (-1) ** i * val
    return float(abs(lhs - rhs))


def gamma_closed_form(n: int, j: int, m: int) -> complex:
    """exp(2 pi i m (j+1)/n) Gamma((j+1)/n)/n."""
    return cmath.exp(2j * math.pi * m * (j + 1) / n) * math.gamma((j + 1) / n) / n


@dataclass
class PeriodMatrix:
    n: int
    values: np.ndarray
    errors: np.ndarray
    cond: float
    det: complex


def period_matrix(n: int, tol: float = 1e-12) -> PeriodMatrix:
    if n < 1:
        raise ValueError("n must be at least 1")
    f = parse_ratfunc(f"z^{n}")
    vals = np.zeros((n, n), dtype=complex)
    errs = np.zeros((n, n))
    for m in range(n):
        path = PathSpec.ray(GaussianRational(0), root_of_unity(m, n))
        for j in range(n):
            omega = parse_form(f"z^{j}*dz")
            pv = pair_relative(f, omega, {}, path, [GaussianRational(0)], tol)
            vals[m, j] = pv.value
            errs[m, j] = pv.abs_err
    return PeriodMatrix(n, vals, errs, float(np.linalg.cond(vals)), complex(np.linalg.det(vals)))


# ---------------------------------------------------------------------------
# real/imaginary splitting of integrands
# ---------------------------------------------------------------------------

@dataclass
class SplitIntegrand:
    cos_re: object  # cos(f2) e^{-f1} omega1
    sin_im: object  # sin(f2) e^{-f1} omega2
    msin_re: object  # -sin(f2) e^{-f1} omega1
    cos_im: object  # cos(f2) e^{-f1} omega2

    def real_part(self, t):
        return self.cos_re(t) + self.sin_im(t)

    def imag_part(self, t):
        return self.msin_re(t) + self.cos_im(t)


def split_integrand(f, omega, path) -> SplitIntegrand:
    """Real integrands for Re and Im of exp(-f) omega over a real parametrised path.

    The path components must be real. With f = f1 + i f2 and omega = omega1 + i omega2:
    Re = cos(f2) e^{-f1} omega1 + sin(f2) e^{-f1} omega2,
    Im = -sin(f2) e^{-f1} omega1 + cos(f2) e^{-f1} omega2.
    """
    f = parse_ratfunc(f) if isinstance(f, str) else RatFunc.coerce(f)
    omega = parse_form(omega) if isinstance(omega, str) else omega
    path = PathSpec.parse(path) if isinstance(path, str) else path
    variables = _common_vars(f, omega, path)
    pieces = path.pieces()
    if len(pieces) != 1 or not pieces[0].exact:
        raise DimensionMismatch("split_integrand needs a single exact real parametrisation")
    piece = pieces[0]
    for c in piece.comps:
        if not (c.num.has_real_coefficients() and c.den.has_real_coefficients()):
            raise DimensionMismatch("path components must be real")
    f1, f2 = real_imag_split(f.with_vars(variables))
    w1 = RatForm(1, variables, {k: real_imag_split(v)[0] for k, v in omega.with_vars(variables).terms.items()})
    w2 = RatForm(1, variables, {k: real_imag_split(v)[1] for k, v in omega.with_vars(variables).terms.items()})
    F1 = pull_function(f1, piece, variables)
    F2 = pull_function(f2, piece, variables)
    G1 = pull_form(w1, piece, variables)
    G2 = pull_form(w2, piece, variables)

    def make(trig, sign, G):
        def fn(t):
            t = np.asarray(t, dtype=float)
            return sign * trig(F2(t).real) * np.exp(-F1(t).real) * G(t).real
        return fn

    return SplitIntegrand(make(np.cos, 1, G1), make(np.sin, 1, G2),
                          make(np.sin, -1, G1), make(np.cos, 1, G2))


def _rand_poly_text(rng, variables, deg):
    terms = []
    if len(variables) == 1:
        (v,) = variables
        for k in range(deg + 1):
            c = rng.randint(-2, 2)
            if c:
                terms.append(f"({c})*{v}^{k}")
    else:
        x, y = variables
        for a in range(deg + 1):
            for b in range(deg + 1 - a):
                c = rng.randint(-2, 2)
                if c and rng.random() < 0.5:
                    terms.append(f"({c})*{x}^{a}*{y}^{b}")
    return " + ".join(terms) or "0"


def random_stokes_instance(rng, max_degree: int = 3):
    """Random (triangle, omega, f) with polynomial data of degree <= max_degree.

    Half of the instances use a holomorphic form P(z) dz, the rest a real
    1-form a dx1 + b dx2 in the plane coordinates.
    """
    while True:
        verts = [complex(rng.randint(-4, 4) / 4, rng.randint(-4, 4) / 4) for _ in range(3)]
        a, b, c = verts
        if abs(((b - a).conjugate() * (c - a)).imag) > 1e-3:
            break
    if rng.random() < 0.5:
        f = _rand_poly_text(rng, ("z",), rng.randint(1, max_degree))
        omega = f"({_rand_poly_text(rng, ('z',), rng.randint(0, max_degree))})*dz"
    else:
        xy = ("x1", "x2")
        f = _rand_poly_text(rng, xy, rng.randint(1, max_degree))
        p = _rand_poly_text(rng, xy, rng.randint(0, max_degree))
        q = _rand_poly_text(rng, xy, rng.randint(0, max_degree))
        omega = f"({p})*dx1 + ({q})*dx2"
    return verts, omega, f
