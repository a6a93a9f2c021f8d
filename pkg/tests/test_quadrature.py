import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate as sci

from xperiods.errors import QuadratureFailure
from xperiods.quadrature import gauss_legendre_triangle, gk15, integrate


def test_gk15_polynomials_exact():
    # K15 integrates degree <= 22 exactly
    for k in range(0, 23, 3):
        v, _ = gk15(lambda x: x ** k, 0.0, 1.0)
        assert abs(v - 1 / (k + 1)) < 1e-14


@settings(max_examples=40)
@given(st.floats(-3, 3), st.floats(0.1, 4), st.floats(0.5, 6), st.floats(-2, 2))
def test_matches_scipy_quad(a, width, w, s):
    f = lambda x: np.exp(s * x) * np.cos(w * x) + 1 / (1 + x * x)  # noqa: E731
    v, err, _ = integrate(f, a, a + width, 1e-12)
    ref, _ = sci.quad(f, a, a + width, epsabs=1e-13, epsrel=1e-13)
    assert abs(v.real - ref) < 1e-10
    assert abs(v.imag) == 0


def test_reversed_limits_and_complex():
    f = lambda x: np.exp(1j * x)  # noqa: E731
    v, _, _ = integrate(f, 1.0, 0.0)
    assert abs(v + (np.exp(1j) - 1) / 1j) < 1e-12


def test_sqrt_singularity():
    v, err, _ = integrate(lambda x: 1 / np.sqrt(x), 0.0, 1.0, 1e-6)
    assert abs(v - 2) < 1e-6 and err < 1e-6


def test_failure_on_nonintegrable():
    with pytest.raises(QuadratureFailure):
        integrate(lambda x: 1 / x, 0.0, 1.0, 1e-10)


def test_failure_on_nan():
    with pytest.raises(QuadratureFailure):
        gk15(lambda x: np.full_like(x, np.nan), 0.0, 1.0)


@pytest.mark.parametrize("i,j", [(0, 0), (1, 0), (2, 3), (4, 1)])
def test_triangle_monomials(i, j):
    # int u^i v^j over the unit triangle = i! j! / (i + j + 2)!
    v, err = gauss_legendre_triangle(lambda u, w: u ** i * w ** j, 12)
    assert abs(v - math.factorial(i) * math.factorial(j) / math.factorial(i + j + 2)) < 1e-14


def test_triangle_vs_scipy_dblquad():
    f = lambda u, v: np.exp(-u * v) * np.cos(u + 2 * v)  # noqa: E731
    ref, _ = sci.dblquad(lambda v, u: f(u, v), 0, 1, 0, lambda u: 1 - u, epsabs=1e-13)
    v, err = gauss_legendre_triangle(f, 16)
    assert abs(v - ref) < 1e-12 and err < 1e-10
