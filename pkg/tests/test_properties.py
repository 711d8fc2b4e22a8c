"""Property suites: packing/covering chain, D_f sandwich, flow group law, deck isometry."""
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from geoflow import (GeodesicPath, GraphPoint, WeightFunction, build_example, covering_number, d_f,
                     flow_shift, packing_number, weight_tail_bound)
from geoflow import properties
from geoflow.paths import point_at, translate_path

PATCH = build_example("tree(2)").expand(8)
DOUBLED = build_example("doubled(2)").expand(6)
SIDES = ["a1", "A1", "a2", "A2"]
EPS = 1e-12


@st.composite
def cyclic_words(draw, max_len=4):
    """Cyclically reduced side words, i.e. periods of vertex-anchored lines."""
    n = draw(st.integers(1, max_len))
    word = [draw(st.sampled_from(SIDES))]
    for _ in range(n - 1):
        prev = word[-1]
        word.append(draw(st.sampled_from([s for s in SIDES if s != prev.swapcase()])))
    if len(word) > 1 and word[0] == word[-1].swapcase():
        word[-1] = word[0]
        if len(word) > 2 and word[-2] == word[-1].swapcase():
            word = word[:1]
    return "".join(word)


@st.composite
def lines(draw, patch=PATCH, radius=2):
    period = patch.base.parse_sides(draw(cyclic_words()))
    keys = [k for k, d in zip(patch.keys, patch.dist.tolist()) if d <= radius]
    start = draw(st.sampled_from(keys))
    g = GeodesicPath.periodic(start, period)
    return flow_shift(g, draw(st.fractions(-2, 2, max_denominator=4)))


group_words = st.lists(st.sampled_from([1, -1, 2, -2]), min_size=1, max_size=3)
radii = st.sampled_from([Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(2), Fraction(3)])


@settings(max_examples=100)
@given(st.lists(st.sampled_from([i for i, d in enumerate(PATCH.dist.tolist()) if d <= 3]),
                min_size=1, max_size=12, unique=True), radii)
def test_packing_covering_chain(idx, r):
    pts = [GraphPoint(PATCH.keys[i]) for i in idx]
    D = [[PATCH.distance(p, q) for q in pts] for p in pts]
    p2, c, p1 = packing_number(D, 2 * r), covering_number(D, r), packing_number(D, r)
    assert p2.exact and c.exact and p1.exact
    assert p2.value <= c.value <= p1.value


@settings(max_examples=100)
@given(lines(), lines(), st.sampled_from([1, 2]))
def test_sandwich(g1, g2, a):
    f = WeightFunction(a)
    d0 = float(PATCH.distance(point_at(PATCH, g1, 0), point_at(PATCH, g2, 0)))
    iv = d_f(PATCH, g1, g2, 4, f)
    assert d0 <= iv.lo + EPS
    assert iv.hi <= d0 + weight_tail_bound(f, 0) + EPS


@settings(max_examples=100)
@given(lines(), st.fractions(-3, 3, max_denominator=4), st.fractions(-3, 3, max_denominator=4),
       st.fractions(-2, 2, max_denominator=4))
def test_flow_group_law(g, s, t, u):
    a, b = flow_shift(flow_shift(g, s), t), flow_shift(g, s + t)
    assert a == b
    assert point_at(PATCH, a, u) == point_at(PATCH, g, s + t + u)
    assert flow_shift(g, 0) == g


@settings(max_examples=50)
@given(lines(radius=1), lines(radius=1), group_words, st.sampled_from([1, 2]))
def test_deck_isometry(g1, g2, g, a):
    f = WeightFunction(a)
    before = d_f(PATCH, g1, g2, 3, f)
    after = d_f(PATCH, translate_path(PATCH, g, g1), translate_path(PATCH, g, g2), 3, f)
    assert abs(before.lo - after.lo) <= EPS and abs(before.hi - after.hi) <= EPS


@settings(max_examples=30)
@given(st.sampled_from([i for i, d in enumerate(DOUBLED.dist.tolist()) if d <= 1]),
       st.sampled_from([i for i, d in enumerate(DOUBLED.dist.tolist()) if d <= 1]),
       st.lists(st.sampled_from([1, -1, 2, -2]), min_size=1, max_size=2))
def test_deck_isometry_on_vertices(i, j, g):
    p, q = GraphPoint(DOUBLED.keys[i]), GraphPoint(DOUBLED.keys[j])
    assert DOUBLED.distance(DOUBLED.translate(g, p), DOUBLED.translate(g, q)) == DOUBLED.distance(p, q)


@pytest.mark.parametrize("check", [properties.packing_chain, properties.sandwich,
                                   properties.flow_group_law, properties.deck_isometry])
def test_seeded_table_checks(check):
    res = check(PATCH, cases=10, seed=7)
    assert res.passed and res.cases == 10
