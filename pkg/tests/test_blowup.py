import cmath
import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from xperiods.algebra import GaussianRational as G
from xperiods.blowup import (
    INF, CurveSpec, blowup_chart, blowup_chart_inverse, build_rd_model, classify_punctures,
    laurent_direction_points, random_curve_spec, rd_generators, rd_rank, rd_ranks,
)
from xperiods.errors import MissingDirection, UnsupportedShape

z, t = sympy.symbols("z t")


def _sym(f):
    return sympy.sympify(str(f).replace("^", "**").replace("i", "I"))


def _sym_point(p):
    return sympy.Rational(p.re.numerator, p.re.denominator) + sympy.I * sympy.Rational(p.im.numerator,
                                                                                      p.im.denominator)


def laurent_order(expr, p):
    """Pole order from the leading term of the Laurent expansion."""
    local = expr.subs(z, 1 / t) if p == INF else expr.subs(z, _sym_point(p) + t)
    _, k = sympy.simplify(local).as_leading_term(t).as_coeff_exponent(t)
    return max(0, -int(k))


def test_classify_examples():
    _, zinf = classify_punctures(CurveSpec.affine_line("z^4"))
    assert [(p.location, p.order) for p in zinf] == [(INF, 4)]
    zf, zinf = classify_punctures(CurveSpec(("1", "inf"), (), "1/(z-1)"))
    assert [(p.location, p.order) for p in zinf] == [(G(1), 1)]
    assert [p.location for p in zf] == [INF]
    zf, zinf = classify_punctures(CurveSpec.affine_line("3"))
    assert zinf == []


def test_spec_validation():
    with pytest.raises(ValueError):
        CurveSpec(("inf",), ("1",), "1/(z-1)")
    with pytest.raises(ValueError):
        CurveSpec(("1",), ("1",), "z")
    with pytest.raises(ValueError):
        CurveSpec(("1",), (), "z^2")
    s = CurveSpec.from_json({"punctures": ["inf", "1/2"], "marked": ["0"], "f": "z^3/(z-1/2)"})
    assert CurveSpec.from_json(s.to_json()) == s


@settings(max_examples=40)
@given(st.integers(0, 10 ** 9))
def test_pole_orders_vs_laurent(seed):
    spec = random_curve_spec(random.Random(seed))
    expr = _sym(spec.f)
    zf, zinf = classify_punctures(spec)
    for d in zf + zinf:
        assert d.order == laurent_order(expr, d.location)


@pytest.mark.parametrize("n", range(1, 7))
def test_rank_zn(n):
    spec = CurveSpec.affine_line(f"z^{n}", ["0"])
    model = build_rd_model(spec)
    assert model.n_arcs == n
    assert rd_rank(spec, 1) == n
    assert rd_rank(spec, 0) == 0


def test_rank_examples():
    assert rd_rank(CurveSpec.affine_line("z", ["0"]), 1) == 1
    assert rd_rank(CurveSpec.affine_line("z^3", ["0"]), 1) == 3
    # m marked points: n + m - 1
    for n in (1, 2, 3):
        for m in (1, 2, 3):
            Y = [str(k) for k in range(m)]
            assert rd_rank(CurveSpec.affine_line(f"z^{n}", Y), 1) == n + m - 1
    # no marked points, f = z: the boundary arc carries everything, so H_1 = 0
    assert rd_ranks(CurveSpec.affine_line("z")) == [0, 0, 0]


@settings(max_examples=30)
@given(st.integers(0, 10 ** 9))
def test_bcirc_bsharp_and_counts(seed):
    spec = random_curve_spec(random.Random(seed))
    model = build_rd_model(spec)
    assert rd_ranks(spec, "bcirc") == rd_ranks(spec, "bsharp")
    _, zinf = classify_punctures(spec)
    total = sum(p.order for p in zinf)
    assert model.n_arcs == total == model.n_sharp_points
    assert model.euler_characteristic() == 2 - len(spec.punctures)
    absolute = model.chain_complex(relative=False).euler_characteristic()
    assert absolute == 2 - len(spec.punctures)


def test_generators():
    assert rd_generators(CurveSpec.affine_line("z", ["0"])) == [G(1)]
    assert rd_generators(CurveSpec.affine_line("z^2", ["0"])) == [G(1), G(-1)]
    assert rd_generators(CurveSpec.affine_line("z^4", ["0"])) == [G(1), G(0, 1), G(-1), G(0, -1)]
    three = rd_generators(CurveSpec.affine_line("z^3", ["0"]))
    assert abs(three[1] - cmath.exp(2j * cmath.pi / 3)) < 1e-15
    with pytest.raises(UnsupportedShape):
        rd_generators(CurveSpec.affine_line("z^2+z", ["0"]))


def test_directions_are_one_infinity():
    # along each direction f(z) tends to +inf with vanishing argument
    for spec_f, loc, d in (("2*i*z^3", INF, 3), ("(1+i)/(z-1)^2", G(1), 2)):
        spec = CurveSpec((INF, "1") if loc != INF else (INF,), (), spec_f)
        pts = laurent_direction_points(spec.f, loc, d)
        for w in pts:
            zz = 1e3 * w if loc == INF else 1 + 1e-3 * w
            val = complex(spec.f.eval_numeric(zz))
            assert val.real > 0 and abs(val.imag) < 1e-2 * val.real


def test_chart_examples():
    r, w, rest = blowup_chart([G(0, 2)], 1)
    assert r == [2] and w == [G(0, 1)] and rest == []
    r, w, _ = blowup_chart([G(0)], 1, {0: G(1)})
    assert r == [0] and w == [G(1)]
    with pytest.raises(MissingDirection):
        blowup_chart([G(0)], 1)
    x = [G(3, 4), G(Fraction(1, 2))]
    r, w, rest = blowup_chart(x, 1)
    assert r == [5] and blowup_chart_inverse(r, w, rest) == x


@given(st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3), st.complex_numbers(max_magnitude=10))
def test_chart_roundtrip_float(a, b):
    r, w, rest = blowup_chart([a, b], 1)
    back = blowup_chart_inverse(r, w, rest)
    assert abs(back[0] - a) <= 1e-12 * abs(a) and back[1] == b
