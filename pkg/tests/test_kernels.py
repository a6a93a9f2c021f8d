import os
import subprocess
import sys
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xperiods._accel import USE_NUMBA
from xperiods.kernels import classify_cells, pack_region
from xperiods.semialg import SignConditionRegion
from xperiods.volume import grid_cells

needs_numba = pytest.mark.skipif(not USE_NUMBA, reason="numba disabled")

coef = st.integers(-3, 3)
monomial = st.tuples(st.integers(0, 3), st.integers(0, 3), coef)


def poly_text(terms):
    return " + ".join(f"({c})*x1^{a}*x2^{b}" for a, b, c in terms) or "0"


regions = st.lists(
    st.fixed_dictionaries({"gt": st.lists(st.lists(monomial, min_size=1, max_size=4).map(poly_text),
                                          min_size=1, max_size=2),
                           "eq": st.lists(st.lists(monomial, min_size=1, max_size=3).map(poly_text),
                                          max_size=1)}),
    min_size=1, max_size=2,
).map(lambda cl: SignConditionRegion.from_json({"dim": 2, "clauses": cl, "box": [["-1", "1"], ["-1", "1"]]}))


@needs_numba
@settings(max_examples=40)
@given(regions, st.integers(2, 5))
def test_numba_numpy_parity(R, k):
    eps = Fraction(1, 2 ** k)
    o, counts, a1, b1 = grid_cells(R, eps, "numba")
    _, _, a2, b2 = grid_cells(R, eps, "numpy")
    assert np.array_equal(a1, a2) and np.array_equal(b1, b2)


@settings(max_examples=30)
@given(regions, st.integers(2, 4))
def test_labels_sound(R, k):
    # inside cells contain only region points; cells that do not meet hold none
    eps = Fraction(1, 2 ** k)
    origin, counts, inside, meets = grid_cells(R, eps, "numpy")
    assert not np.any(inside & ~meets)
    rng = np.random.default_rng(k)
    idx = np.stack(np.unravel_index(np.arange(inside.size), tuple(counts)), axis=1)
    lo = np.array([float(o) for o in origin]) + idx * float(eps)
    for _ in range(3):
        pts = lo + rng.uniform(0.01, 0.99, size=lo.shape) * float(eps)
        member = R.contains_many(pts)
        assert np.all(member[inside])
        assert not np.any(member[~meets])


@settings(max_examples=20)
@given(regions, st.integers(1, 4))
def test_nested_meshes_monotone(R, k):
    # halving eps refines cells, so inner counts grow and outer counts shrink in volume
    e1, e2 = Fraction(1, 2 ** k), Fraction(1, 2 ** (k + 1))
    _, _, a1, b1 = grid_cells(R, e1)
    _, _, a2, b2 = grid_cells(R, e2)
    assert a2.sum() * float(e2) ** 2 >= a1.sum() * float(e1) ** 2 - 1e-15
    assert b2.sum() * float(e2) ** 2 <= b1.sum() * float(e1) ** 2 + 1e-15


def test_three_dimensional_ball():
    R = SignConditionRegion.from_json({"dim": 3, "clauses": [{"gt": ["1 - x1^2 - x2^2 - x3^2"]}],
                                       "box": [["-1", "1"]] * 3})
    _, _, inside, meets = grid_cells(R, Fraction(1, 16))
    vol = 4 / 3 * np.pi
    cell = (1 / 16) ** 3
    assert inside.sum() * cell <= vol <= meets.sum() * cell


def test_pack_shapes():
    R = SignConditionRegion.from_json({"dim": 2, "clauses": [{"gt": ["x1 + x2^2"], "eq": ["x1"]}],
                                       "box": [["0", "1"], ["0", "1"]]})
    exps, coefs, nterms, kinds, clause_of, ncl, affine = pack_region(R)
    assert ncl == 1 and exps.shape[0] == 2 + 4
    assert list(kinds[:2]) == [0, 1] and affine[1] and not affine[0]


def test_backend_request_when_disabled():
    code = ("from xperiods._accel import USE_NUMBA; from xperiods.volume import grid_volume;"
            "from xperiods.semialg import SignConditionRegion as R;"
            "r = R.from_json({'dim': 2, 'clauses': [{'gt': ['1 - x1^2 - x2^2']}], 'box': [['-1','1'],['-1','1']]});"
            "print(USE_NUMBA, grid_volume(r, '1/16'))")
    env = dict(os.environ, XP_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    flag, rest = out.stdout.strip().split(" ", 1)
    assert flag == "False"
    R = SignConditionRegion.from_json({"dim": 2, "clauses": [{"gt": ["1 - x1^2 - x2^2"]}],
                                       "box": [["-1", "1"], ["-1", "1"]]})
    from xperiods.volume import grid_volume
    assert rest == str(grid_volume(R, "1/16"))
    forced = code.replace("print(USE_NUMBA, grid_volume(r, '1/16'))",
                          "from xperiods.kernels import classify_cells, pack_region;"
                          "classify_cells([0,0], 0.5, [2,2], pack_region(r), 'numba')")
    bad = subprocess.run([sys.executable, "-c", forced], env=env, capture_output=True, text=True)
    assert bad.returncode != 0 and "numba backend requested but disabled" in bad.stderr
