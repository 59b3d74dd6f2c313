import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from toricstab.errors import FanError
from toricstab.fan import (
    P1XP1_FAN,
    P2_FAN,
    Cone,
    ConeHit,
    RayHit,
    Sector,
    blowup,
    fan_validate,
    is_regular,
    locate,
    merge_fans,
    parse_fan,
    regularize,
    regularize_cone,
    sector_contains_ray,
)
from toricstab.lattice import det2, primitive

from oracles import hull_boundary_rays

primitive_vec = (
    st.tuples(st.integers(-40, 40), st.integers(-40, 40))
    .filter(lambda v: v != (0, 0))
    .map(primitive)
)


def test_named_fans_validate():
    assert P2_FAN.rays == ((-1, -1), (1, 0), (0, 1))
    assert P2_FAN.determinants() == [1, 1, 1]
    assert len(P1XP1_FAN) == 4 and P1XP1_FAN.is_smooth()


def test_two_opposite_rays_rejected():
    with pytest.raises(FanError, match="consecutive det <= 0"):
        fan_validate([(1, 0), (-1, 0)])


def test_duplicate_ray_rejected():
    with pytest.raises(FanError, match=r"duplicate ray \(1, 0\)"):
        fan_validate([(1, 0), (2, 0), (0, 1), (-1, -1)])


def test_ordered_input_must_wind_once():
    with pytest.raises(FanError, match="consecutive det"):
        fan_validate([(1, 0), (-1, -1), (0, 1)], ordered=True)
    double_cover = [(1, 0), (-1, 1), (0, -1), (1, 1), (-1, 0), (1, -1)]
    with pytest.raises(FanError, match="wind 2 times"):
        fan_validate(double_cover, ordered=True)


def test_half_plane_gap_rejected():
    with pytest.raises(FanError, match="consecutive det <= 0"):
        fan_validate([(1, 0), (0, 1), (-1, 0)])


@pytest.mark.parametrize(
    "cone, expected", [(((1, 0), (0, 1)), True), (((1, 0), (1, 2)), False), (((0, 1), (-1, -1)), True)]
)
def test_is_regular(cone, expected):
    assert is_regular(Cone(*cone)) is expected


def test_cone_must_be_strictly_convex():
    with pytest.raises(FanError):
        Cone((1, 0), (-1, 0))
    with pytest.raises(FanError):
        Cone((0, 1), (1, 0))


def test_blowup_examples():
    f = blowup(P2_FAN, Cone((1, 0), (0, 1)))
    assert set(f.rays) == {(1, 0), (1, 1), (0, 1), (-1, -1)}
    g = blowup(P2_FAN, Cone((0, 1), (-1, -1)))
    assert set(g.rays) - set(P2_FAN.rays) == {(-1, 0)}
    with pytest.raises(FanError):
        blowup(P2_FAN, Cone((1, 0), (1, 1)))


@pytest.mark.parametrize(
    "cone, expected",
    [
        (((1, 0), (0, 1)), []),
        (((1, 0), (1, 2)), [(1, 1)]),
        (((1, 0), (2, 5)), [(1, 1), (1, 2)]),
    ],
)
def test_regularize_cone_examples(cone, expected):
    assert regularize_cone(Cone(*cone)) == expected
    assert hull_boundary_rays(*cone) == expected


@pytest.mark.parametrize(
    "v, expected",
    [
        ((1, 1), ConeHit(Cone((1, 0), (0, 1)))),
        ((0, 1), RayHit((0, 1))),
        ((-1, 3), ConeHit(Cone((0, 1), (-1, -1)))),
        ((-5, -5), RayHit((-1, -1))),
    ],
)
def test_locate_examples(v, expected):
    assert locate(P2_FAN, v) == expected


def test_sector_examples():
    # the arc between (3,2) and (-2,-5) that contains (1,-10)
    s = Sector.through((3, 2), (1, -10), (-2, -5))
    assert (s.start, s.end) == ((-2, -5), (3, 2))
    assert sector_contains_ray(s, (1, 0))
    q = Sector((1, 0), (0, 1), (1, 1))
    assert sector_contains_ray(q, (1, 2))
    assert not sector_contains_ray(q, (-1, 0))


def test_sector_wider_than_half_turn():
    s = Sector((0, 1), (1, 0), (-1, -1))
    assert s.contains((0, -1)) and s.contains((-1, 0))
    assert not s.contains((1, 1))
    with pytest.raises(FanError):
        Sector((1, 0), (0, 1), (-1, -1))


def test_sector_within_cone():
    c = Cone((1, 0), (0, 1))
    assert Sector((2, 1), (1, 2), (1, 1)).within(c)
    assert Sector.of_cone(c).within(c)
    assert not Sector((2, 1), (-1, 2), (1, 1)).within(c)


def test_parse_fan_formats():
    assert parse_fan("1 0  0 1  -1 -1") == P2_FAN
    assert parse_fan("[[1,0],[0,1],[-1,-1]]") == P2_FAN
    assert parse_fan("p1xp1") == P1XP1_FAN
    with pytest.raises(FanError):
        parse_fan("1 0 0")


def test_fan_equality_is_rotation_invariant():
    a = fan_validate([(0, 1), (-1, -1), (1, 0)], ordered=True)
    assert a == P2_FAN and hash(a) == hash(P2_FAN)


def test_merge_fans():
    g = fan_validate([(1, 2), (-1, 0), (0, -1)])
    m = merge_fans(P2_FAN, g)
    assert set(P2_FAN.rays) | set(g.rays) <= set(m.rays)
    assert m.is_smooth()


def test_random_blowup_sequences():
    rng = random.Random(7)
    for _ in range(500):
        f = P2_FAN
        for _ in range(rng.randint(1, 30)):
            cones = f.cones()
            c = cones[rng.randrange(len(cones))]
            g = blowup(f, c)
            assert len(g) == len(f) + 1
            assert g.is_smooth()
            assert fan_validate(g.rays, ordered=True) == g
            f = g


cone_strategy = st.tuples(primitive_vec, primitive_vec).filter(lambda p: det2(p[0], p[1]) > 0)


@given(cone_strategy)
def test_regularize_matches_hull_oracle(pair):
    c = Cone(*pair)
    rays = regularize_cone(c)
    assert rays == hull_boundary_rays(*pair)
    chain = [c.start] + rays + [c.end]
    assert all(det2(u, v) == 1 for u, v in zip(chain, chain[1:]))
    f = fan_validate([c.start, c.end, primitive((-c.start[0] - c.end[0], -c.start[1] - c.end[1]))])
    once = regularize(f)
    assert once.is_smooth()
    assert regularize(once) == once
    assert all(regularize_cone(k) == [] for k in once.cones())


@given(primitive_vec, st.integers(1, 50))
def test_locate_total_and_scale_invariant(v, k):
    f = blowup(blowup(P2_FAN, Cone((1, 0), (0, 1))), Cone((0, 1), (-1, -1)))
    hit = f.locate(v)
    assert hit == f.locate((k * v[0], k * v[1]))
    if isinstance(hit, RayHit):
        assert hit.ray == v
    else:
        assert hit.cone.contains(v)
        assert sum(1 for c in f.cones() if c.contains(v)) == 1
