import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xperiods.errors import InvalidComplex, NotInPolyhedron
from xperiods.simplex import (
    GeomComplex, OpenSimplex, barycentric_subdivision, carrier, closed_core, closure_complex, faces, homotopy,
    point, random_complex, random_point, retract, subdivision_carrier, validate_complex,
)


def S(*pts):
    return OpenSimplex([point(p) for p in pts])


def line(*simplices):
    return GeomComplex([S(*[(x,) for x in s]) for s in simplices])


def test_faces_counts():
    assert faces(S((0,))) == {S((0,))}
    assert faces(S((0,), (1,))) == {S((0,)), S((1,)), S((0,), (1,))}
    assert len(faces(S((0, 0), (1, 0), (0, 1)))) == 7


def test_affine_independence():
    with pytest.raises(InvalidComplex):
        S((0, 0), (1, 1), (2, 2))


def test_validate_examples():
    assert validate_complex(GeomComplex([S((0, 0), (1, 0)), S((1, 0), (1, 1))]))
    bad = validate_complex(GeomComplex([S((0, 0), (1, 1)), S((0, 1), (1, 0))]))
    assert not bad and bad.pair is not None
    tri = closure_complex(GeomComplex([S((0, 0), (1, 0), (0, 1))]))
    assert len(tri) == 7 and validate_complex(tri)
    # overlapping collinear segments share no common face
    assert not validate_complex(line((0, 2), (1, 3)))


def test_closure_examples():
    assert closure_complex(line((0, 1))) == line((0,), (1,), (0, 1))
    K = line((0,), (1,), (0, 1))
    assert closure_complex(K) == K


def test_subdivision_examples():
    h = F(1, 2)
    assert barycentric_subdivision(line((0,), (1,), (0, 1))) == line((0,), (1,), (h,), (0, h), (h, 1))
    assert barycentric_subdivision(line((0, 1))) == line((h,), (0, h), (h, 1))
    assert barycentric_subdivision(line((0,))) == line((0,))
    tri = closure_complex(GeomComplex([S((0, 0), (1, 0), (0, 1))]))
    assert len(barycentric_subdivision(tri)) == 7 + 12 + 6
    assert validate_complex(barycentric_subdivision(tri))


def test_core_examples():
    assert len(closed_core(line((0, 1)))) == 0
    K = line((0,), (1,), (0, 1))
    assert closed_core(K) == K
    assert closed_core(barycentric_subdivision(line((0, 1)))) == line((F(1, 2),))


def test_retract_examples():
    K = line((0, 1))
    assert retract(K, (F(1, 4),)) == (F(1, 2),)
    assert retract(K, (F(1, 2),)) == (F(1, 2),)
    closed = line((0,), (1,), (0, 1))
    for x in (F(0), F(1, 7), F(1)):
        assert retract(closed, (x,)) == (x,)
    assert homotopy(K, (F(1, 4),), 0) == (F(1, 4),)
    assert homotopy(K, (F(1, 4),), 1) == (F(1, 2),)
    assert homotopy(K, (F(1, 4),), F(1, 2)) == (F(3, 8),)
    with pytest.raises(ValueError):
        homotopy(K, (F(1, 4),), 2)


def test_carrier_examples():
    K = line((0,), (1,), (0, 1))
    assert carrier(K, (F(1, 2),)) == S((0,), (1,))
    assert carrier(K, (0,)) == S((0,))
    with pytest.raises(NotInPolyhedron):
        carrier(K, (2,))


def test_json_roundtrip():
    K = closure_complex(GeomComplex([S((0, 0), (1, 0), (0, 1))]))
    assert GeomComplex.from_json(K.to_json()) == K


def test_open_triangle_retract():
    # single open triangle: core of the subdivision is the barycenter
    K = GeomComplex([S((0, 0), (3, 0), (0, 3))])
    assert retract(K, (F(1, 2), F(1, 5))) == (F(1), F(1))


seeds = st.integers(0, 2 ** 32 - 1)


@settings(max_examples=15)
@given(seeds)
def test_subdivision_preserves_polyhedron(seed):
    rng = random.Random(seed)
    K = random_complex(rng, max_simplices=8)
    B = barycentric_subdivision(K)
    for _ in range(20):
        x, _ = random_point(rng, K)
        assert B.contains_point(x)
        # perturbed points: membership agrees either way
        y = tuple(c + F(rng.randint(-3, 3), 17) for c in x)
        assert K.contains_point(y) == B.contains_point(y)


@settings(max_examples=15)
@given(seeds)
def test_core_nonempty_and_monotone(seed):
    rng = random.Random(seed)
    K = random_complex(rng, max_simplices=10)
    L = GeomComplex(rng.sample(sorted(K.simplices, key=lambda s: s.sorted_vertices()), rng.randint(1, len(K))))
    cK = closed_core(barycentric_subdivision(K))
    cL = closed_core(barycentric_subdivision(L))
    assert len(cK) > 0 and len(cL) > 0
    assert cL <= cK


@settings(max_examples=10)
@given(seeds)
def test_subdivision_carrier_matches_explicit(seed):
    rng = random.Random(seed)
    K = random_complex(rng, max_simplices=6)
    B = barycentric_subdivision(K)
    for _ in range(10):
        x, _ = random_point(rng, K)
        assert subdivision_carrier(K, x) == carrier(B, x)
