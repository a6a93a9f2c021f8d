"""Acceptance suite: one test per criterion, each at its stated tolerance.

A summary line per criterion is printed at the end of the run (see conftest).
"""
import cmath
import math
import random
import time
from fractions import Fraction

import numpy as np
import pytest
import scipy.integrate as sci

from oracles import random_chain_complex, random_density_domain, random_simplicial, snf_betti
from test_chains import _interval_cover, les_identity_holds, random_chain_map
from xperiods.blowup import CurveSpec, random_curve_spec, rd_rank, rd_ranks
from xperiods.chains import cech_nerve, homology_ranks, simplicial_chain_complex, subcomplex_cover
from xperiods.derham import h1_rank
from xperiods.errors import RejectedPath
from xperiods.periods import (
    PathSpec, integrate_path, period_matrix, properness_check, random_stokes_instance, stokes_residual,
)
from xperiods.simplex import (
    barycentric_subdivision, closed_core, homotopy, random_complex, random_point, retract, subdivision_carrier,
)
from xperiods.volume import DensityDomain, represent_volume

crit = pytest.mark.criterion


@crit(1, "period value of exp(-z) dz on [0, inf)")
def test_c1_period_value():
    t0 = time.perf_counter()
    pv = integrate_path("z", "dz", PathSpec.parse("ray:0:1"), tol=1e-10)
    elapsed = time.perf_counter() - t0
    assert abs(pv.value - 1) <= 1e-10
    assert pv.abs_err <= 1e-10
    assert elapsed < 1.0


def closed_form(n, j, m):
    # substitute z = w^(1/n) along the ray at angle 2 pi m / n
    return cmath.exp(2j * math.pi * m * (j + 1) / n) * math.gamma((j + 1) / n) / n


@crit(2, "period matrix of (A1, {0}, z^n) for n = 1..4")
def test_c2_period_matrix():
    t0 = time.perf_counter()
    for n in range(1, 5):
        P = period_matrix(n)
        for m in range(n):
            for j in range(n):
                ref = closed_form(n, j, m)
                assert abs(P.values[m, j] - ref) <= 1e-8 * abs(ref)
        assert abs(P.det) > 1e-6
        assert np.linalg.matrix_rank(P.values) == n
    assert time.perf_counter() - t0 < 10


@crit(3, "rapid decay ranks and B-circ / B-sharp agreement")
def test_c3_rapid_decay_ranks():
    for n in range(1, 7):
        assert rd_rank(CurveSpec(("inf",), ("0",), f"z^{n}"), 1) == n
    rng = random.Random(20240611)
    for _ in range(30):
        spec = random_curve_spec(rng)
        assert rd_ranks(spec, "bcirc") == rd_ranks(spec, "bsharp")


@crit(4, "twisted de Rham rank at two truncations")
def test_c4_twisted_derham():
    for n in range(1, 7):
        lo, hi = h1_rank(f"z^{n}", [0], 2 * n), h1_rank(f"z^{n}", [0], 2 * n + 7)
        assert lo == hi == n
        assert lo == rd_rank(CurveSpec(("inf",), ("0",), f"z^{n}"), 1)


def _check_retraction(K, rng):
    core = closed_core(barycentric_subdivision(K))
    for _ in range(4):
        x, _ = random_point(rng, K)
        r = retract(K, x)
        assert retract(K, r) == r
        assert homotopy(K, x, 0) == x and homotopy(K, x, 1) == r
        cx = subdivision_carrier(K, x)
        for _ in range(10):
            t = Fraction(rng.randint(0, 99), 100)
            y = homotopy(K, x, t)
            # the segment stays in the open carrier of x in beta(K)
            assert subdivision_carrier(K, y) == cx
        assert set(subdivision_carrier(K, r).vertices) <= set(cx.vertices)
    for _ in range(3):
        if len(core) == 0:
            break
        y, _ = random_point(rng, core)
        assert retract(K, y) == y


@crit(5, "retraction suite on 100 random complexes")
def test_c5_retraction():
    rng = random.Random(7)
    for _ in range(100):
        K = random_complex(rng, max_simplices=20)
        assert len(K) <= 20 and K.ambient == 3
        _check_retraction(K, rng)


@crit(6, "Stokes residual on 50 random instances")
def test_c6_stokes():
    rng = random.Random(11)
    worst = 0.0
    for _ in range(50):
        verts, omega, f = random_stokes_instance(rng, max_degree=3)
        worst = max(worst, stokes_residual(verts, omega, f))
    assert worst < 1e-6


@crit(7, "rejection verdicts for the three counterexamples")
def test_c7_rejections():
    ray = PathSpec.parse("ray:1:1")
    v = properness_check("1/z", ray, "dz")
    assert not v.ok and "not closed" in v.reason
    with pytest.raises(RejectedPath):
        integrate_path("1/z", "dz", ray)
    v = properness_check("1/z", ray, "dz/z^2")
    assert not v.ok
    with pytest.raises(RejectedPath):
        integrate_path("1/z", "dz/z^2", ray)
    forced = integrate_path("1/z", "dz/z^2", ray, force=True)
    assert abs(forced.value - (1 - math.exp(-1))) < 1e-8
    v = properness_check("i*z", ray, "dz")
    assert not v.ok and "not a cycle for rapid decay homology" in v.reason


@crit(8, "volume representation of density domains")
def test_c8_volume():
    rng = random.Random(5)
    for _ in range(20):
        obj, density, coeffs, pieces = random_density_domain(rng)
        rep = represent_volume(DensityDomain.from_json(obj, density))
        a = np.polynomial.Polynomial(coeffs)
        ref = sum(s * sci.quad(a, x0, x1, epsabs=1e-13)[0] for x0, x1, s in pieces)
        assert abs((rep.U_plus.volume - rep.U_minus.volume) - ref) < 1e-6
    D = DensityDomain.from_json({"dim": 2, "charts": [{"x1": ["-1", "1"], "lower": "0",
                                                       "upper": "sqrt(1 - x1^2)"}]}, "1")
    assert abs(represent_volume(D).value - 1.5707963) < 1e-7


@crit(9, "chain algebra: SNF oracle, cone sequence, Cech nerve")
def test_c9_chain_algebra():
    rng = random.Random(3)
    for _ in range(150):
        C, betti = random_chain_complex(rng, max_total=50)
        assert sum(C.dims) <= 50
        assert homology_ranks(C) == betti == snf_betti(C)
    done = 0
    while done < 50:
        K = random_simplicial(rng)
        if K is None:
            continue
        C = simplicial_chain_complex(K)
        assert homology_ranks(C) == snf_betti(C)
        done += 1
    for _ in range(50):
        assert les_identity_holds(random_chain_map(rng))
    K, cover = _interval_cover()
    assert cech_nerve(2, subcomplex_cover(K, cover)).ranks()[:2] == [1, 0]
