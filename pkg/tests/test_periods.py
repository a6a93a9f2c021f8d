import cmath
import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate as sci

from xperiods.algebra import GaussianRational as G, parse_ratfunc
from xperiods.errors import EndpointNotMarked, PoleOnSimplex, QuadratureFailure, RejectedPath
from xperiods.periods import (
    PathSpec, UniRat, gamma_closed_form, integrate_path, pair_relative, parse_point, period_matrix,
    properness_check, random_stokes_instance, root_of_unity, split_integrand, stokes_residual, tail_bound,
    tail_start,
)


def test_parse_points_and_paths():
    assert parse_point("root(1/4)") == G(0, 1)
    assert abs(parse_point("root(1/3)") - cmath.exp(2j * math.pi / 3)) < 1e-15
    p = PathSpec.parse("ray:0:1")
    assert p.start == G(0) and p.end is None
    q = PathSpec.parse("polyline:0;1;1+i")
    assert len(q.pieces()) == 2 and q.end == G(1, 1)
    r = PathSpec.parse("param:t,t^2:0:inf")
    assert r.n_components == 2 and r.end is None


def test_properness_examples():
    v = properness_check(parse_ratfunc("1/z"), PathSpec.ray(1, 1))
    assert v.kind == "Reject" and "not closed" in v.reason
    v = properness_check(parse_ratfunc("z"), PathSpec.ray(0, cmath.exp(1j * math.pi / 4)))
    assert v.kind == "OkBcirc"
    v = properness_check(parse_ratfunc("i*z"), PathSpec.ray(1, 1))
    assert v.kind == "Reject" and "B" in v.reason
    v = properness_check(parse_ratfunc("z"), PathSpec.ray(0, 1))
    assert v.kind == "OkStrip" and v.strip.contains(5)
    assert properness_check(parse_ratfunc("z^2"), PathSpec.segment(0, G(1, 1))).kind == "OkStrip"


def test_integrate_examples():
    assert abs(integrate_path("z", "dz", "ray:0:1").value - 1) < 1e-10
    assert abs(integrate_path("z", "z*dz", "ray:0:1").value - 1) < 1e-10
    assert abs(integrate_path("z^2", "dz", "ray:0:1").value - math.sqrt(math.pi) / 2) < 1e-10


def test_independent_of_direction():
    # f = z on rays into the right half plane: value 1 regardless of the angle
    for ang in (-1.2, -0.5, 0.3, 1.0):
        v = integrate_path("z", "dz", PathSpec.ray(0, cmath.exp(1j * ang)))
        assert abs(v.value - 1) < 1e-9


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_closed_form_entries(n):
    for m in range(n):
        for j in range(n):
            v = integrate_path(f"z^{n}", f"z^{j}*dz", PathSpec.ray(0, root_of_unity(m, n)), 1e-12)
            ref = gamma_closed_form(n, j, m)
            assert abs(v.value - ref) <= 1e-10 * abs(ref)
            assert v.abs_err < 1e-11


def test_gamma_closed_form_vs_math_gamma():
    assert gamma_closed_form(1, 0, 0) == 1
    assert abs(gamma_closed_form(2, 1, 0) - 0.5) < 1e-15


def test_rejections():
    with pytest.raises(RejectedPath):
        integrate_path("1/z", "dz", "ray:1:1")
    with pytest.raises(RejectedPath):
        integrate_path("i*z", "dz", "ray:1:1")
    forced = integrate_path("1/z", "dz/z^2", "ray:1:1", force=True)
    assert forced.verdict == "Rejected"
    assert abs(forced.value - (1 - math.exp(-1))) < 1e-8
    with pytest.raises(QuadratureFailure):
        integrate_path("1/z", "dz", "ray:1:1", force=True)


def test_pole_on_path_rejected():
    with pytest.raises(RejectedPath):
        integrate_path("z", "dz/(z-2)", "ray:0:1")


@settings(max_examples=30)
@given(st.integers(1, 3), st.integers(0, 3), st.floats(0.5, 3), st.floats(0.5, 4))
def test_tail_bound_dominates(q, m, c, T):
    F = UniRat(np.array([0.3] + [0.0] * (q - 1) + [c]), np.array([1.0]))
    Gf = UniRat(np.array([0.0] * m + [1.0]), np.array([1.0]))
    T = max(T, tail_start(F, Gf))
    exact, _ = sci.quad(lambda t: abs(np.exp(-F(t)) * Gf(t)), T, np.inf, epsabs=1e-300, limit=200)
    assert tail_bound(F, Gf, T) >= exact


def test_pair_relative_examples():
    ray = PathSpec.ray(0, 1)
    assert abs(pair_relative("z", "dz", {}, ray, [G(0)]).value - 1) < 1e-10
    assert abs(pair_relative("z", "dz", {G(0): 1}, ray, [G(0)]).value) < 1e-10
    assert abs(pair_relative("z", "0*dz", {G(0): 1}, ray, [G(0)]).value + 1) < 1e-12
    with pytest.raises(EndpointNotMarked):
        pair_relative("z", "dz", {}, ray, [G(1)])
    seg = PathSpec.segment(0, 1)
    v = pair_relative("z", "0*dz", {G(0): 1, G(1): 2}, seg, [G(0), G(1)]).value
    assert abs(v - (2 * math.exp(-1) - 1)) < 1e-12


def test_period_matrix_small():
    pm = period_matrix(1)
    assert abs(pm.values[0, 0] - 1) < 1e-11
    pm = period_matrix(2)
    assert abs(pm.values[0, 1] - 0.5) < 1e-11
    assert abs(pm.det) > 0.1


def test_stokes_examples():
    tri = [0, 1, 1j]
    assert stokes_residual(tri, "0*dz", "z") == 0.0
    assert stokes_residual(tri, "dz", "0") < 1e-13
    assert stokes_residual([(0, 0), (1, 0), (0, 1)], "x1*dx2", "x1*x2") < 1e-12
    with pytest.raises(PoleOnSimplex):
        stokes_residual([0, 1, 1j], "dz/z", "z")


@settings(max_examples=25)
@given(st.integers(0, 10 ** 9))
def test_stokes_random(seed):
    verts, omega, f = random_stokes_instance(random.Random(seed))
    assert stokes_residual(verts, omega, f) < 1e-8


def test_split_integrand_examples():
    s = split_integrand("i*x1", "dx1", PathSpec.param(["t"], 0, 1))
    ts = np.linspace(0, 1, 7)
    assert np.allclose(s.real_part(ts), np.cos(ts), atol=1e-15)
    assert np.allclose(s.imag_part(ts), -np.sin(ts), atol=1e-15)
    r = split_integrand("x1^2", "x1*dx1", PathSpec.param(["t"], 0, 1))
    assert np.allclose(r.real_part(ts), np.exp(-ts ** 2) * ts) and np.allclose(r.imag_part(ts), 0)


def test_split_integrand_matches_complex_integral():
    f, w = "(1+2*i)*x1^2 + i*x1", "(1 - i*x1)*dx1"
    s = split_integrand(f, w, PathSpec.param(["t"], 0, 1))
    re, _ = sci.quad(s.real_part, 0, 1, epsabs=1e-13)
    im, _ = sci.quad(s.imag_part, 0, 1, epsabs=1e-13)
    v = integrate_path(f, w, PathSpec.param(["t"], 0, 1))
    assert abs(v.value - complex(re, im)) < 1e-10
