import json
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from toricstab.errors import NotHomeomorphismError, RayCollapsedError, SingularMatrixError
from toricstab.fan import P2_FAN
from toricstab.lattice import IntMatrix, primitive
from toricstab.tropical import (
    MonomialSupport,
    PLIntegralMap,
    RationalMapData,
    compose,
    conjugate,
    evaluate_ray,
    from_monomial,
    is_homeomorphism,
    iterate,
    load_map,
    map_data_from_json,
    nu_eval,
    ray_equivalent,
    require_homeomorphism,
    tropical_formula,
    tropicalize,
)

from oracles import usnich_formula


def random_primitive(rng, bound=10**6):
    while True:
        v = (rng.randint(-bound, bound), rng.randint(-bound, bound))
        if v != (0, 0):
            return primitive(v)


def test_nu_eval_examples():
    assert nu_eval(MonomialSupport([(0, 3)]), (2, 5)) == 15
    assert nu_eval(MonomialSupport([(0, 0), (0, 1)]), (1, -2)) == -2
    assert nu_eval(MonomialSupport([(0, 0), (0, 1)]), (1, 2)) == 0


def test_support_validation():
    with pytest.raises(ValueError):
        MonomialSupport([])
    with pytest.raises(ValueError):
        MonomialSupport([(-1, 0)])
    assert MonomialSupport([(1, 2), (1, 2)]).exponents == frozenset({(1, 2)})


def test_tropicalize_monomial_example():
    d = RationalMapData(MonomialSupport([(0, 3)]), MonomialSupport([(4, 2)]), MonomialSupport([(1, 0)]))
    T = tropicalize(d)
    assert T.linear_matrix() == IntMatrix(-1, 3, 3, 2)


def test_tropicalize_usnich(usnich):
    assert usnich.fan.rays == ((-1, 0), (0, -1), (1, 0), (0, 1))
    assert usnich.linear_pieces() == 2
    assert set(usnich.pieces) == {IntMatrix(0, 1, -1, 1), IntMatrix(0, 1, -1, 0)}
    rng = random.Random(3)
    for _ in range(1000):
        u = (rng.randint(-1000, 1000), rng.randint(-1000, 1000))
        assert usnich(u) == usnich_formula(*u)


def test_tropicalize_identity():
    d = RationalMapData(MonomialSupport([(1, 0)]), MonomialSupport([(0, 1)]), MonomialSupport([(0, 0)]))
    assert tropicalize(d).linear_matrix() == IntMatrix.identity()


def test_from_monomial_examples():
    R = from_monomial(IntMatrix(0, -1, 1, 0))
    assert R.image_ray((1, 0)) == (0, 1)
    assert from_monomial(IntMatrix(1, 0, 0, 1)).image_ray((3, -2)) == (3, -2)
    with pytest.raises(SingularMatrixError):
        from_monomial(IntMatrix(1, 2, 2, 4))


def test_from_monomial_round_trips_through_supports():
    rng = random.Random(11)
    for _ in range(50):
        A = IntMatrix(*(rng.randint(-5, 5) for _ in range(4)))
        if A.det == 0:
            continue
        via_supports = tropicalize(RationalMapData.from_monomial(A))
        assert via_supports.linear_matrix() == A


def test_evaluate_ray_examples(usnich):
    assert evaluate_ray(usnich, (1, 0)) == ((0, -1), 1)
    assert evaluate_ray(from_monomial(IntMatrix(-1, -1, 3, -1)), (-1, 3)) == ((-1, -3), 2)
    assert evaluate_ray(from_monomial(IntMatrix.identity()), (5, 7)) == ((5, 7), 1)


def test_degenerate_map_flagged_and_rejected():
    s = MonomialSupport([(1, 0), (0, 1)])
    T = tropicalize(RationalMapData(s, s, MonomialSupport([(0, 0)])))
    assert T.degenerate
    v = is_homeomorphism(T)
    assert not v.accepted and "singular" in v.reason
    with pytest.raises(NotHomeomorphismError):
        require_homeomorphism(T)
    collapsed = PLIntegralMap(P2_FAN, (IntMatrix(1, 1, 1, 1),) * 3)
    with pytest.raises(RayCollapsedError, match="ray collapsed"):
        collapsed.evaluate_ray((1, -1))


def test_homeomorphism_orientation(usnich):
    assert is_homeomorphism(from_monomial(IntMatrix(-1, 3, 3, 2))).orientation == "reversing"
    assert is_homeomorphism(usnich).orientation == "preserving"


def test_non_injective_pl_map_rejected():
    # doubles angles: rays of the P1xP1 fan go around twice
    from toricstab.fan import fan_validate

    f = fan_validate([(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)])
    imgs = {(1, 0): (1, 0), (1, 1): (0, 1), (0, 1): (-1, 0), (-1, 1): (0, -1),
            (-1, 0): (1, 0), (-1, -1): (0, 1), (0, -1): (-1, 0), (1, -1): (0, -1)}
    pieces = []
    for c in f.cones():
        a, b = imgs[c.start], imgs[c.end]
        # solve M @ start = a, M @ end = b (both cones here are unimodular)
        s, e = c.start, c.end
        det = s[0] * e[1] - s[1] * e[0]
        inv = ((e[1], -e[0]), (-s[1], s[0]))
        m = [[(a[i] * inv[0][j] + b[i] * inv[1][j]) // det for j in range(2)] for i in range(2)]
        pieces.append(IntMatrix.from_rows(m))
    T = PLIntegralMap(f, tuple(pieces))
    v = is_homeomorphism(T)
    assert not v.accepted and "wind 2" in v.reason


def test_continuity_checked_on_construction():
    with pytest.raises(ValueError, match="disagree"):
        PLIntegralMap(P2_FAN, (IntMatrix.identity(), IntMatrix(2, 0, 0, 1), IntMatrix.identity()))


def test_usnich_fifth_iterate_is_identity(usnich):
    U = iterate(usnich, 5)
    assert all(M == IntMatrix.identity() for M in U.pieces)
    rng = random.Random(5)
    for _ in range(1000):
        u = random_primitive(rng)
        assert U.image_ray(u) == u


def test_third_iterate_is_scalar():
    U = iterate(from_monomial(IntMatrix(-1, -1, 3, -1)), 3)
    assert U.linear_matrix() == IntMatrix(8, 0, 0, 8)
    assert evaluate_ray(U, (1, 0)) == ((1, 0), 8)


def test_iterate_one_and_compose_identity(usnich):
    assert ray_equivalent(iterate(usnich, 1), usnich)
    I = from_monomial(IntMatrix.identity())
    T = compose(usnich, I)
    rng = random.Random(9)
    for _ in range(1000):
        u = random_primitive(rng)
        assert T.image_ray(u) == usnich.image_ray(u)


def test_json_round_trip(usnich, tmp_path):
    d = map_data_from_json({"p1": [[1, 1]], "p2": [[0, 0], [0, 1]], "p3": [[1, 0]], "generic": True})
    assert ray_equivalent(tropicalize(d), usnich)
    assert load_map(json.dumps({"monomial": [[2, 1], [1, 1]]})).linear_matrix() == IntMatrix(2, 1, 1, 1)
    assert json.loads(json.dumps(usnich.to_json()))["linear_pieces"] == 2
    with pytest.raises(KeyError):
        map_data_from_json({"p1": [[1, 0]]})


# ---------------------------------------------------------------------------
# properties

small = st.integers(-5, 5)
matrices = st.builds(IntMatrix, small, small, small, small).filter(lambda M: M.det != 0)
exponent = st.tuples(st.integers(0, 4), st.integers(0, 4))
support = st.lists(exponent, min_size=1, max_size=4).map(MonomialSupport)
map_data = st.builds(RationalMapData, support, support, support)
lattice_point = st.tuples(st.integers(-10**6, 10**6), st.integers(-10**6, 10**6))


@given(matrices, matrices)
def test_compose_functorial(A, B):
    assert ray_equivalent(compose(from_monomial(A), from_monomial(B)), from_monomial(A @ B))


@given(map_data, st.lists(lattice_point, min_size=100, max_size=100), st.integers(1, 10**4))
def test_tropicalize_integral_and_homogeneous(d, points, k):
    T = tropicalize(d)
    for u in points:
        img = T(u)
        assert all(isinstance(c, int) for c in img)
        assert img == tropical_formula(d, u)
        assert T((k * u[0], k * u[1])) == (k * img[0], k * img[1])
    for u, M, N in zip(T.fan.rays, T.pieces, T.pieces[-1:] + T.pieces[:-1]):
        assert M.apply(u) == N.apply(u)


@given(map_data, map_data)
def test_compose_matches_pointwise(d1, d2):
    T, S = tropicalize(d1), tropicalize(d2)
    TS = compose(T, S)
    rng = random.Random(0)
    for _ in range(50):
        u = (rng.randint(-1000, 1000), rng.randint(-1000, 1000))
        assert TS(u) == T(S(u))
