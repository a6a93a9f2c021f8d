"""Exact symbolic layer: Gaussian rationals, sparse polynomials, rational
functions and differential forms, plus the expression grammar.

Expressions use ``^`` or ``**`` for powers, ``i`` for the imaginary unit and
``dz``, ``dx1``, ... for differentials of the variables ``z``, ``x1``, ...
"""
from __future__ import annotations

import ast
import math
import re
from fractions import Fraction
from functools import reduce
from numbers import Rational

import numpy as np

from .errors import DimensionMismatch, ParseError, PoleError

FLOAT_POLE_TOL = 1e-12


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot make an exact rational from {x!r}")


class GaussianRational:
    """Exact element ``re + im*i`` of Q(i)."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", _frac(re))
        object.__setattr__(self, "im", _frac(im))

    def __setattr__(self, name, value):
        raise AttributeError("GaussianRational is immutable")

    @classmethod
    def coerce(cls, x):
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, (int, Rational)):
            return cls(x, 0)
        if isinstance(x, str):
            return parse_constant(x, exact=True)
        raise TypeError(f"not an exact scalar: {x!r}")

    # -- arithmetic ---------------------------------------------------------
    def _other(self, other):
        if isinstance(other, GaussianRational):
            return other
        if isinstance(other, (int, Rational)):
            return GaussianRational(other)
        return None

    def __add__(self, other):
        o = self._other(other)
        if o is None:
            return complex(self) + other if isinstance(other, (float, complex)) else NotImplemented
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __pos__(self):
        return self

    def __sub__(self, other):
        o = self._other(other)
        if o is None:
            return complex(self) - other if isinstance(other, (float, complex)) else NotImplemented
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._other(other)
        if o is None:
            return other - complex(self) if isinstance(other, (float, complex)) else NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._other(other)
        if o is None:
            return complex(self) * other if isinstance(other, (float, complex)) else NotImplemented
        return GaussianRational(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def norm(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def inverse(self):
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(i)")
        return GaussianRational(self.re / n, -self.im / n)

    def __truediv__(self, other):
        o = self._other(other)
        if o is None:
            return complex(self) / other if isinstance(other, (float, complex)) else NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._other(other)
        if o is None:
            return other / complex(self) if isinstance(other, (float, complex)) else NotImplemented
        return o * self.inverse()

    def __pow__(self, k):
        if not isinstance(k, int):
            return complex(self) ** k
        if k < 0:
            return self.inverse() ** (-k)
        result, base = ONE, self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    # -- comparisons / conversions ------------------------------------------
    def __eq__(self, other):
        o = self._other(other)
        if o is None:
            if isinstance(other, (float, complex)):
                return complex(self) == other
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def is_real(self) -> bool:
        return self.im == 0

    def __repr__(self):
        return f"GaussianRational({self})"

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}*i"
        sign = "+" if self.im > 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}*i"


ZERO = GaussianRational(0)
ONE = GaussianRational(1)
I = GaussianRational(0, 1)


def _is_exact(x) -> bool:
    return isinstance(x, (GaussianRational, int, Rational))


# ---------------------------------------------------------------------------
# polynomials
# ---------------------------------------------------------------------------

def _natural_key(name: str):
    m = re.fullmatch(r"([A-Za-z_]+?)(\d*)", name)
    if m is None:
        return (name, 0)
    return (m.group(1), int(m.group(2) or 0))


class Poly:
    """Sparse multivariate polynomial over Q(i), keyed by exponent vectors."""

    __slots__ = ("vars", "terms")

    def __init__(self, variables, terms=None):
        self.vars = tuple(variables)
        clean = {}
        for e, c in (terms or {}).items():
            e = tuple(int(k) for k in e)
            if len(e) != len(self.vars):
                raise DimensionMismatch(f"exponent {e} does not match variables {self.vars}")
            c = GaussianRational.coerce(c)
            if c:
                clean[e] = clean.get(e, ZERO) + c
        self.terms = {e: c for e, c in clean.items() if c}

    @classmethod
    def const(cls, c, variables=()):
        return cls(variables, {(0,) * len(tuple(variables)): c})

    @classmethod
    def var(cls, name, variables):
        variables = tuple(variables)
        e = [0] * len(variables)
        e[variables.index(name)] = 1
        return cls(variables, {tuple(e): 1})

    def with_vars(self, variables):
        variables = tuple(variables)
        if variables == self.vars:
            return self
        idx = []
        for v in self.vars:
            if v not in variables:
                raise DimensionMismatch(f"variable {v} missing from {variables}")
            idx.append(variables.index(v))
        terms = {}
        for e, c in self.terms.items():
            ne = [0] * len(variables)
            for k, j in enumerate(idx):
                ne[j] = e[k]
            terms[tuple(ne)] = c
        return Poly(variables, terms)

    def _aligned(self, other):
        if isinstance(other, Poly):
            if other.vars == self.vars:
                return self, other
            merged = tuple(self.vars) + tuple(v for v in other.vars if v not in self.vars)
            return self.with_vars(merged), other.with_vars(merged)
        return self, Poly.const(other, self.vars)

    def __add__(self, other):
        if isinstance(other, RatFunc):
            return NotImplemented
        a, b = self._aligned(other)
        terms = dict(a.terms)
        for e, c in b.terms.items():
            terms[e] = terms.get(e, ZERO) + c
        return Poly(a.vars, terms)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, RatFunc):
            return NotImplemented
        return self + (-other if isinstance(other, Poly) else -GaussianRational.coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, RatFunc):
            return NotImplemented
        a, b = self._aligned(other)
        terms = {}
        for e1, c1 in a.terms.items():
            for e2, c2 in b.terms.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                terms[e] = terms.get(e, ZERO) + c1 * c2
        return Poly(a.vars, terms)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power of a polynomial")
        result, base = Poly.const(1, self.vars), self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, RatFunc):
            return other == self
        if not isinstance(other, Poly):
            try:
                other = Poly.const(other, self.vars)
            except TypeError:
                return NotImplemented
        a, b = self._aligned(other)
        return a.terms == b.terms

    def __hash__(self):
        return hash(frozenset(self.with_vars(sorted(self.vars, key=_natural_key)).terms.items()))

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def constant_value(self) -> GaussianRational:
        return self.terms.get((0,) * len(self.vars), ZERO)

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self.terms), default=-1)

    def degree_in(self, name) -> int:
        if name not in self.vars:
            return 0 if self.terms else -1
        j = self.vars.index(name)
        return max((e[j] for e in self.terms), default=-1)

    def has_real_coefficients(self) -> bool:
        return all(c.im == 0 for c in self.terms.values())

    def conjugate(self):
        return Poly(self.vars, {e: c.conjugate() for e, c in self.terms.items()})

    def real_part(self):
        return Poly(self.vars, {e: GaussianRational(c.re) for e, c in self.terms.items()})

    def imag_part(self):
        return Poly(self.vars, {e: GaussianRational(c.im) for e, c in self.terms.items()})

    def derivative(self, name):
        if name not in self.vars:
            return Poly(self.vars)
        j = self.vars.index(name)
        terms = {}
        for e, c in self.terms.items():
            if e[j]:
                ne = list(e)
                ne[j] -= 1
                terms[tuple(ne)] = c * e[j]
        return Poly(self.vars, terms)

    def subs(self, values: dict):
        """Substitute polynomials (or RatFuncs) for variables; exact."""
        out = None
        for e, c in self.terms.items():
            term = c
            for v, k in zip(self.vars, e):
                if k:
                    factor = values.get(v, Poly.var(v, self.vars))
                    term = term * factor ** k if not isinstance(term, GaussianRational) else factor ** k * term
            out = term if out is None else out + term
        if out is None:
            return Poly(())  # zero, free of variables so it aligns with any target
        return out

    def eval_exact(self, point):
        point = [GaussianRational.coerce(p) for p in point]
        if len(point) != len(self.vars):
            raise DimensionMismatch(f"point has {len(point)} coordinates, expected {len(self.vars)}")
        total = ZERO
        for e, c in self.terms.items():
            term = c
            for x, k in zip(point, e):
                if k:
                    term = term * x ** k
            total = total + term
        return total

    def eval_numeric(self, *xs):
        """Vectorised complex evaluation; ``xs`` are arrays, one per variable."""
        if len(xs) != len(self.vars):
            raise DimensionMismatch(f"got {len(xs)} arguments, expected {len(self.vars)}")
        xs = [np.asarray(x) for x in xs]
        shape = np.broadcast(*xs).shape if xs else ()
        out = np.zeros(shape, dtype=complex)
        for e, c in self.terms.items():
            term = np.full(shape, complex(c))
            for x, k in zip(xs, e):
                if k:
                    term = term * x ** k
            out = out + term
        return out

    def univariate_coeffs(self, name=None):
        """Dense coefficient list, constant term first (exact)."""
        if len(self.vars) > 1 or (name is not None and self.vars and self.vars[0] != name):
            others = [v for v in self.vars if v != name]
            if any(e[self.vars.index(v)] for v in others for e in self.terms):
                raise DimensionMismatch("polynomial is not univariate")
        j = 0 if name is None else (self.vars.index(name) if name in self.vars else None)
        deg = self.degree_in(name) if name is not None else self.degree()
        coeffs = [ZERO] * (max(deg, 0) + 1)
        for e, c in self.terms.items():
            k = e[j] if j is not None and e else 0
            coeffs[k] = coeffs[k] + c
        return coeffs

    def __repr__(self):
        return f"Poly({self})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms, key=lambda e: (-sum(e), e)):
            c = self.terms[e]
            mono = "*".join(
                v if k == 1 else f"{v}^{k}" for v, k in zip(self.vars, e) if k
            )
            cs = str(c)
            if c.re != 0 and c.im != 0:
                cs = f"({cs})"
            if not mono:
                parts.append(cs)
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{cs}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")


# ---------------------------------------------------------------------------
# rational functions
# ---------------------------------------------------------------------------

class RatFunc:
    """Quotient of two polynomials with a shared variable list."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        if not isinstance(num, Poly):
            num = Poly.const(num, den.vars if isinstance(den, Poly) else ())
        if den is None:
            den = Poly.const(1, num.vars)
        elif not isinstance(den, Poly):
            den = Poly.const(den, num.vars)
        if den.is_zero():
            raise PoleError("denominator is identically zero")
        num, den = num._aligned(den)
        # normalise a constant denominator away
        if den.is_constant():
            inv = den.constant_value().inverse()
            num = num * inv
            den = Poly.const(1, num.vars)
        self.num, self.den = num, den

    @property
    def vars(self):
        return self.num.vars

    @classmethod
    def coerce(cls, x, variables=()):
        if isinstance(x, RatFunc):
            return x
        if isinstance(x, Poly):
            return cls(x)
        return cls(Poly.const(x, variables))

    @classmethod
    def var(cls, name, variables):
        return cls(Poly.var(name, variables))

    def with_vars(self, variables):
        return RatFunc(self.num.with_vars(variables), self.den.with_vars(variables))

    def _aligned(self, other):
        other = RatFunc.coerce(other, self.vars)
        if other.vars == self.vars:
            return self, other
        merged = tuple(self.vars) + tuple(v for v in other.vars if v not in self.vars)
        return self.with_vars(merged), other.with_vars(merged)

    def __add__(self, other):
        a, b = self._aligned(other)
        if a.den == b.den:
            return RatFunc(a.num + b.num, a.den)
        return RatFunc(a.num * b.den + b.num * a.den, a.den * b.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(-self.num, self.den)

    def __sub__(self, other):
        return self + (-RatFunc.coerce(other, self.vars))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        a, b = self._aligned(other)
        return RatFunc(a.num * b.num, a.den * b.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        a, b = self._aligned(other)
        if b.num.is_zero():
            raise PoleError("division by the zero function")
        return RatFunc(a.num * b.den, a.den * b.num)

    def __rtruediv__(self, other):
        return RatFunc.coerce(other, self.vars) / self

    def __pow__(self, k: int):
        if k < 0:
            return RatFunc(self.den ** (-k), self.num ** (-k))
        return RatFunc(self.num ** k, self.den ** k)

    def __eq__(self, other):
        try:
            a, b = self._aligned(other)
        except TypeError:
            return NotImplemented
        return a.num * b.den == b.num * a.den

    def __hash__(self):
        return hash((str(self.num), str(self.den)))

    def is_polynomial(self) -> bool:
        return self.den.is_constant()

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def derivative(self, name):
        if self.is_polynomial():
            return RatFunc(self.num.derivative(name))
        return RatFunc(
            self.num.derivative(name) * self.den - self.num * self.den.derivative(name),
            self.den * self.den,
        )

    def conjugate(self):
        return RatFunc(self.num.conjugate(), self.den.conjugate())

    def subs(self, values: dict):
        num = self.num.subs(values)
        den = self.den.subs(values)
        return RatFunc.coerce(num) / RatFunc.coerce(den)

    def eval_exact(self, point):
        d = self.den.eval_exact(point)
        if not d:
            raise PoleError(f"pole at {tuple(str(p) for p in point)}")
        return self.num.eval_exact(point) / d

    def eval_numeric(self, *xs):
        num = self.num.eval_numeric(*xs)
        if self.is_polynomial():
            return num
        den = self.den.eval_numeric(*xs)
        return num / den

    def __call__(self, *xs):
        return eval_ratfunc(self, xs)

    def __repr__(self):
        return f"RatFunc({self})"

    def __str__(self):
        if self.is_polynomial():
            return str(self.num)
        return f"({self.num})/({self.den})"


def eval_ratfunc(F: RatFunc, x):
    """Evaluate ``F`` at ``x``: exact for exact input, complex otherwise."""
    x = list(x) if isinstance(x, (list, tuple, np.ndarray)) else [x]
    if len(x) != len(F.vars):
        raise DimensionMismatch(f"point has {len(x)} coordinates, F has variables {F.vars}")
    if all(_is_exact(v) for v in x):
        return F.eval_exact(x)
    xs = [complex(v) for v in x]
    den = complex(F.den.eval_numeric(*xs))
    scale = max(1.0, max((abs(complex(c)) for c in F.den.terms.values()), default=1.0))
    if abs(den) <= FLOAT_POLE_TOL * scale:
        raise PoleError(f"pole at {xs}")
    return complex(F.num.eval_numeric(*xs)) / den


def real_imag_split(f: RatFunc):
    """Split ``f`` into real and imaginary parts for real arguments.

    Returns ``(f1, f2)`` with rational coefficients and ``f = f1 + i*f2`` on
    real points off the polar locus.
    """
    if f.den.has_real_coefficients():
        return RatFunc(f.num.real_part(), f.den), RatFunc(f.num.imag_part(), f.den)
    dbar = f.den.conjugate()
    top = f.num * dbar
    bottom = (f.den * dbar).real_part()
    return RatFunc(top.real_part(), bottom), RatFunc(top.imag_part(), bottom)


def univariate_gcd(a: Poly, b: Poly) -> Poly:
    """Monic gcd of two univariate polynomials over Q(i)."""
    name = a.vars[0] if a.vars else (b.vars[0] if b.vars else "z")
    while not b.is_zero():
        _, r = poly_divmod(a, b, name)
        a, b = b, r
    if a.is_zero():
        return a
    lead = a.univariate_coeffs(name)[-1]
    return a * lead.inverse()


def poly_divmod(a: Poly, b: Poly, name=None):
    """Univariate division with remainder over Q(i)."""
    a, b = a._aligned(b)
    name = name or (a.vars[0] if a.vars else "z")
    variables = a.vars if a.vars else (name,)
    ca = a.univariate_coeffs(name)
    cb = b.univariate_coeffs(name)
    while len(cb) > 1 and not cb[-1]:
        cb.pop()
    if not cb[-1]:
        raise ZeroDivisionError("polynomial division by zero")
    q = [ZERO] * max(len(ca) - len(cb) + 1, 1)
    r = list(ca)
    inv = cb[-1].inverse()
    for k in range(len(ca) - len(cb), -1, -1):
        coef = r[k + len(cb) - 1] * inv
        q[k] = coef
        if coef:
            for j, c in enumerate(cb):
                r[k + j] = r[k + j] - coef * c
    r = r[: len(cb) - 1] or [ZERO]

    def build(cs):
        if name in variables:
            j = variables.index(name)
            terms = {}
            for k, c in enumerate(cs):
                e = [0] * len(variables)
                e[j] = k
                terms[tuple(e)] = c
            return Poly(variables, terms)
        return Poly.const(cs[0], variables)

    return build(q), build(r)


# ---------------------------------------------------------------------------
# differential forms
# ---------------------------------------------------------------------------

def _wedge_sign(i_idx, j_idx):
    """Sign and sorted index tuple of dx_I ^ dx_J, or (0, None)."""
    merged = list(i_idx) + list(j_idx)
    if len(set(merged)) != len(merged):
        return 0, None
    sign = 1
    arr = merged[:]
    for a in range(len(arr)):
        for b in range(len(arr) - 1 - a):
            if arr[b] > arr[b + 1]:
                arr[b], arr[b + 1] = arr[b + 1], arr[b]
                sign = -sign
    return sign, tuple(arr)


class RatForm:
    """Differential form ``sum_I a_I dx_I`` with RatFunc coefficients.

    Index tuples are sorted positions into ``vars``.
    """

    __slots__ = ("degree", "vars", "terms")

    def __init__(self, degree, variables, terms=None):
        self.degree = int(degree)
        self.vars = tuple(variables)
        if self.degree > len(self.vars):
            raise DimensionMismatch(f"degree {degree} exceeds dimension {len(self.vars)}")
        clean = {}
        for idx, a in (terms or {}).items():
            idx = tuple(idx)
            if len(idx) != self.degree:
                raise DimensionMismatch(f"index {idx} has wrong length for degree {degree}")
            sign, sidx = _wedge_sign(idx, ())
            if sign == 0:
                continue
            a = RatFunc.coerce(a, self.vars).with_vars(self.vars) * sign
            clean[sidx] = clean[sidx] + a if sidx in clean else a
        self.terms = {k: v for k, v in clean.items() if not v.is_zero()}

    @classmethod
    def function(cls, f, variables=None):
        f = RatFunc.coerce(f)
        variables = tuple(variables) if variables is not None else f.vars
        return cls(0, variables, {(): f.with_vars(variables)})

    @classmethod
    def dx(cls, name, variables, coeff=1):
        variables = tuple(variables)
        return cls(1, variables, {(variables.index(name),): RatFunc.coerce(coeff, variables)})

    def coefficient(self, idx) -> RatFunc:
        idx = tuple(idx)
        return self.terms.get(idx, RatFunc.coerce(0, self.vars))

    def with_vars(self, variables):
        variables = tuple(variables)
        if variables == self.vars:
            return self
        terms = {}
        for idx, a in self.terms.items():
            names = [self.vars[k] for k in idx]
            terms[tuple(variables.index(n) for n in names)] = a.with_vars(variables)
        return RatForm(self.degree, variables, terms)

    def _aligned(self, other):
        if other.vars == self.vars:
            return self, other
        merged = tuple(self.vars) + tuple(v for v in other.vars if v not in self.vars)
        return self.with_vars(merged), other.with_vars(merged)

    def __add__(self, other):
        a, b = self._aligned(other)
        if a.degree != b.degree:
            raise DimensionMismatch("cannot add forms of different degrees")
        terms = dict(a.terms)
        for idx, c in b.terms.items():
            terms[idx] = terms[idx] + c if idx in terms else c
        return RatForm(a.degree, a.vars, terms)

    def __neg__(self):
        return RatForm(self.degree, self.vars, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, g):
        g = RatFunc.coerce(g, self.vars)
        merged = tuple(self.vars) + tuple(v for v in g.vars if v not in self.vars)
        form = self.with_vars(merged)
        g = g.with_vars(merged)
        return RatForm(form.degree, merged, {k: v * g for k, v in form.terms.items()})

    def wedge(self, other):
        a, b = self._aligned(other)
        terms = {}
        for i1, c1 in a.terms.items():
            for i2, c2 in b.terms.items():
                sign, idx = _wedge_sign(i1, i2)
                if sign:
                    term = c1 * c2 * sign
                    terms[idx] = terms[idx] + term if idx in terms else term
        return RatForm(a.degree + b.degree, a.vars, terms)

    def d(self):
        if self.degree == len(self.vars):
            return _zero_top(self)
        terms = {}
        for idx, a in self.terms.items():
            for j, v in enumerate(self.vars):
                da = a.derivative(v)
                if da.is_zero():
                    continue
                sign, sidx = _wedge_sign((j,), idx)
                if sign:
                    t = da * sign
                    terms[sidx] = terms[sidx] + t if sidx in terms else t
        return RatForm(self.degree + 1, self.vars, terms)

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, RatForm):
            return NotImplemented
        a, b = self._aligned(other)
        if a.degree != b.degree:
            return a.is_zero() and b.is_zero()
        keys = set(a.terms) | set(b.terms)
        return all(a.coefficient(k) == b.coefficient(k) for k in keys)

    def __repr__(self):
        return f"RatForm({self})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for idx in sorted(self.terms):
            diff = "^".join("d" + self.vars[k] for k in idx)
            parts.append(f"({self.terms[idx]})" + (f"*{diff}" if diff else ""))
        return " + ".join(parts)


class _TopZero(RatForm):
    """Zero form one degree above the ambient dimension."""

    __slots__ = ()

    def __init__(self, degree, variables):
        object.__setattr__(self, "degree", degree)
        object.__setattr__(self, "vars", tuple(variables))
        object.__setattr__(self, "terms", {})


def _zero_top(form):
    return _TopZero(form.degree + 1, form.vars)


def d_f_apply(omega: RatForm, f) -> RatForm:
    """Twisted differential ``d omega - df ^ omega``."""
    f = RatFunc.coerce(f)
    merged = tuple(omega.vars) + tuple(v for v in f.vars if v not in omega.vars)
    omega = omega.with_vars(merged)
    f = f.with_vars(merged)
    if omega.degree >= len(merged):
        return _TopZero(omega.degree + 1, merged)
    df = RatForm(1, merged, {(j,): f.derivative(v) for j, v in enumerate(merged)})
    return omega.d() - df.wedge(omega)


# ---------------------------------------------------------------------------
# expression grammar
# ---------------------------------------------------------------------------

_FUNCS = {"exp": np.exp, "sin": np.sin, "cos": np.cos, "sqrt": np.sqrt, "log": np.log,
          "clamp": lambda x: np.clip(x, 0.0, 1.0)}  # clamp to [0, 1], for restricted sin
_NUM_CONSTS = {"pi": math.pi, "e": math.e}
_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")


def _to_ast(text: str):
    if not isinstance(text, str) or not text.strip():
        raise ParseError("empty expression")
    src = text.replace("^", "**")
    try:
        return ast.parse(src, mode="eval").body
    except SyntaxError as exc:
        raise ParseError(f"cannot parse {text!r}: {exc.msg}") from None


def expression_names(text: str):
    """Variables (and differentials) mentioned in an expression."""
    tree = _to_ast(text)
    names = set()
    for node in ast.walk(tree):
        if isinstance(node, ast.Name) and node.id not in ("i", "j") \
                and node.id not in _NUM_CONSTS and node.id not in _FUNCS:
            names.add(node.id)
    return names


def _default_vars(names):
    base = set()
    for n in names:
        if n.startswith("d") and len(n) > 1 and (n[1:] in names or n[1:] in ("z", "x", "y", "t") or _NAME_RE.fullmatch(n[1:])):
            base.add(n[1:])
        else:
            base.add(n)
    return tuple(sorted(base, key=_natural_key))


class _ExactBuilder:
    def __init__(self, variables):
        self.vars = tuple(variables)

    def build(self, node):
        if isinstance(node, ast.Constant):
            v = node.value
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ParseError(f"unsupported literal {v!r}")
            if isinstance(v, float):
                v = Fraction(repr(v))
            return RatFunc(Poly.const(v, self.vars))
        if isinstance(node, ast.Name):
            if node.id == "i":
                return RatFunc(Poly.const(I, self.vars))
            if node.id in self.vars:
                return RatFunc.var(node.id, self.vars)
            raise ParseError(f"unknown symbol {node.id!r}")
        if isinstance(node, ast.UnaryOp):
            inner = self.build(node.operand)
            if isinstance(node.op, ast.USub):
                return -inner
            if isinstance(node.op, ast.UAdd):
                return inner
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Pow):
                k = _int_exponent(node.right)
                return self.build(node.left) ** k
            left, right = self.build(node.left), self.build(node.right)
            if isinstance(node.op, ast.Add):
                return left + right
            if isinstance(node.op, ast.Sub):
                return left - right
            if isinstance(node.op, ast.Mult):
                return left * right
            if isinstance(node.op, ast.Div):
                return left / right
        if isinstance(node, ast.Call):
            raise ParseError("functions are not allowed in rational expressions")
        raise ParseError(f"unsupported syntax: {ast.dump(node)[:60]}")


def _int_exponent(node):
    sign = 1
    while isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        if isinstance(node.op, ast.USub):
            sign = -sign
        node = node.operand
    if isinstance(node, ast.Constant) and isinstance(node.value, int) and not isinstance(node.value, bool):
        return sign * node.value
    raise ParseError("exponents must be integer literals")


def parse_ratfunc(text: str, variables=None) -> RatFunc:
    """Parse an exact rational function, e.g. ``"(1+i)*z^2/(z-1)"``."""
    if isinstance(text, RatFunc):
        return text if variables is None else text.with_vars(variables)
    names = expression_names(text)
    if variables is None:
        variables = _default_vars(names)
    variables = tuple(variables)
    unknown = names - set(variables)
    if unknown:
        raise ParseError(f"unknown symbols {sorted(unknown)} (variables are {variables})")
    return _ExactBuilder(variables).build(_to_ast(text))


def parse_form(text: str, variables=None) -> RatForm:
    """Parse a 0- or 1-form such as ``"z*dz"`` or ``"x1*dx2 - x2*dx1"``."""
    if isinstance(text, RatForm):
        return text if variables is None else text.with_vars(variables)
    names = expression_names(text)
    if variables is None:
        variables = _default_vars(names)
    variables = tuple(variables)
    dnames = tuple("d" + v for v in variables)
    unknown = names - set(variables) - set(dnames)
    if unknown:
        raise ParseError(f"unknown symbols {sorted(unknown)} (variables are {variables})")
    ext = variables + dnames
    expr = _ExactBuilder(ext).build(_to_ast(text))
    n = len(variables)
    if any(any(e[n:]) for e in expr.den.terms):
        raise ParseError("differentials may not appear in a denominator")
    degrees = {sum(e[n:]) for e in expr.num.terms} or {0}
    if len(degrees) != 1:
        raise ParseError("form is not homogeneous in the differentials")
    deg = degrees.pop()
    if deg > 1:
        raise ParseError("only 0- and 1-forms can be written as expressions")
    den = expr.den.with_vars(ext)
    den_plain = Poly(variables, {e[:n]: c for e, c in den.terms.items()})
    if deg == 0:
        num = Poly(variables, {e[:n]: c for e, c in expr.num.terms.items()})
        return RatForm(0, variables, {(): RatFunc(num, den_plain)})
    terms = {}
    for j in range(n):
        part = {e[:n]: c for e, c in expr.num.terms.items() if e[n + j] == 1}
        if part:
            terms[(j,)] = RatFunc(Poly(variables, part), den_plain)
    return RatForm(1, variables, terms)


def compile_numeric(text: str, variables=None):
    """Compile an expression, possibly with exp/sin/cos/sqrt, to a numpy callable.

    Returns ``(fn, variables)``; ``fn(*arrays)`` evaluates with broadcasting.
    """
    names = expression_names(text)
    if variables is None:
        variables = _default_vars(names)
    variables = tuple(variables)
    unknown = names - set(variables)
    if unknown:
        raise ParseError(f"unknown symbols {sorted(unknown)} (variables are {variables})")
    tree = _to_ast(text)

    def ev(node, env):
        if isinstance(node, ast.Constant):
            if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
                raise ParseError(f"unsupported literal {node.value!r}")
            return node.value
        if isinstance(node, ast.Name):
            if node.id in ("i", "j"):
                return 1j
            if node.id in env:
                return env[node.id]
            if node.id in _NUM_CONSTS:
                return _NUM_CONSTS[node.id]
            raise ParseError(f"unknown symbol {node.id!r}")
        if isinstance(node, ast.UnaryOp):
            v = ev(node.operand, env)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            a, b = ev(node.left, env), ev(node.right, env)
            op = node.op
            if isinstance(op, ast.Add):
                return a + b
            if isinstance(op, ast.Sub):
                return a - b
            if isinstance(op, ast.Mult):
                return a * b
            if isinstance(op, ast.Div):
                return a / b
            if isinstance(op, ast.Pow):
                return a ** b
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS:
            if len(node.args) != 1:
                raise ParseError(f"{node.func.id} takes one argument")
            return _FUNCS[node.func.id](ev(node.args[0], env))
        raise ParseError(f"unsupported syntax: {ast.dump(node)[:60]}")

    # validate once on scalars so syntax errors surface at compile time
    probe = {v: np.float64(0.5) for v in variables}
    with np.errstate(all="ignore"):
        ev(tree, probe)

    def fn(*xs):
        if len(xs) != len(variables):
            raise DimensionMismatch(f"expected {len(variables)} arguments")
        env = {v: np.asarray(x, dtype=float) for v, x in zip(variables, xs)}
        out = ev(tree, env)
        shape = np.broadcast(*env.values()).shape if env else ()
        return np.broadcast_to(np.asarray(out), shape) if np.ndim(out) == 0 else out

    return fn, variables


def parse_constant(text: str, exact: bool = False):
    """Parse a constant: exact Q(i) when possible, otherwise a complex float.

    Accepts ``"1/2+3/4*i"``, ``"2i"``-free forms such as ``"2*i"``, Python
    complex literals like ``"0.5+1j"``, and numeric expressions like
    ``"exp(2*pi*i/3)"``.
    """
    if isinstance(text, (GaussianRational, int, Rational)):
        return GaussianRational.coerce(text)
    if isinstance(text, (float, complex)):
        if exact:
            raise ParseError(f"{text!r} is not exact")
        return complex(text)
    s = str(text).strip()
    if s.lower() in ("inf", "oo", "infinity"):
        raise ParseError("infinity is not a finite constant")
    try:
        tree = _to_ast(s)
        has_float = any(isinstance(n, ast.Constant) and isinstance(n.value, (float, complex))
                        for n in ast.walk(tree))
        if not has_float:
            val = _ExactBuilder(()).build(tree)
            return val.num.constant_value() / val.den.constant_value()
    except ParseError:
        if exact:
            raise
    if exact:
        raise ParseError(f"{text!r} is not an exact Gaussian rational")
    try:
        return complex(s.replace(" ", ""))
    except ValueError:
        pass
    fn, variables = compile_numeric(s, ())
    return complex(np.asarray(fn()).item())


def as_complex_array(x):
    return np.asarray(x, dtype=complex)


def poly_product(polys, variables=()):
    return reduce(lambda a, b: a * b, polys, Poly.const(1, variables))
