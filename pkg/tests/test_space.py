import heapq
import itertools
import json
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from geoflow import (GraphPoint, GraphValidationError, GroupSpec, SpaceDescription, UncertifiedError,
                     build_example, covering_number, multiply, orbit_count, packing_number,
                     sphere_and_ball_counts, systole, validate_graph)
from geoflow.space import free_reduce, inverse, invert_word, parse_word


def derived_distances(desc: SpaceDescription, radius: int) -> dict:
    """Independent Dijkstra on the derived cover built straight from the voltages."""
    base, volts = desc.base, desc.voltages
    start = (desc.basepoint, ())
    dist = {start: Fraction(0)}
    heap = [(Fraction(0), 0, start)]
    tick = itertools.count(1)
    while heap:
        d, _, (v, w) = heapq.heappop(heap)
        if d > dist[(v, w)]:
            continue
        for s in range(base.n_sides):
            if base.side_tail(s) != v:
                continue
            nd = d + base.side_length(s)
            if nd > radius:
                continue
            node = (base.side_head(s), free_reduce(w + volts[s]))
            if nd < dist.get(node, nd + 1):
                dist[node] = nd
                heapq.heappush(heap, (nd, next(tick), node))
    return dist


@pytest.mark.parametrize("name", ["tree(2)", "doubled(2)", "circle_rose(2)", "wedge(3)"])
def test_patch_matches_independent_dijkstra(name):
    spec = build_example(name)
    patch = spec.expand(4)
    oracle = derived_distances(spec.description, 4)
    assert len(patch) == len(oracle)
    for key, d in zip(patch.keys, patch.dist.tolist()):
        v, w = patch.split_key(key)
        assert oracle[(v, w)] == Fraction(d, patch.scale)


def test_tree_distance_is_reduced_word_length(tree2):
    rng = random.Random(3)
    keys = [k for k, d in zip(tree2.keys, tree2.dist.tolist()) if d <= 3]
    for _ in range(200):
        a, b = rng.choice(keys), rng.choice(keys)
        u, w = tree2.split_key(a)[1], tree2.split_key(b)[1]
        expected = len(free_reduce(invert_word(u) + w))
        assert tree2.distance(GraphPoint(a), GraphPoint(b)) == expected


@pytest.mark.parametrize("T", range(1, 8))
def test_tree_sphere_and_ball_counts(tree2, T):
    ball, sphere = sphere_and_ball_counts(tree2, T)
    assert sphere == 4 * 3 ** (T - 1)
    assert ball == 1 + 2 * (3 ** T - 1)
    assert orbit_count(tree2, T) == ball


def test_edge_points_and_half_integer_distances(circle_rose2):
    p = circle_rose2
    c = p.base.side_by_label("c")
    mid = p.point_on(p.key(0), c, Fraction(1, 2))
    assert p.distance(mid, p.basepoint) == Fraction(1, 2)
    a1 = p.base.side_by_label("a1")
    other = p.point_on(p.key(0), a1, Fraction(1, 4))
    assert p.distance(mid, other) == Fraction(3, 4)


def test_doubled_edges_share_endpoints(doubled2):
    p = doubled2
    a1, t1 = p.base.side_by_label("a1"), p.base.side_by_label("t1")
    m1 = p.point_on(p.key(0), a1, Fraction(1, 2))
    m2 = p.point_on(p.key(0), t1, Fraction(1, 2))
    assert p.distance(m1, m2) == 1
    assert p.distance(p.basepoint, p.vertex("a1")) == 1


def test_systole(tree2):
    assert systole(tree2, tree2.basepoint) == 1
    a2 = tree2.base.side_by_label("a2")
    assert systole(tree2, tree2.point_on(tree2.key(0), a2, Fraction(1, 2))) == 1


def test_outside_patch_is_uncertified(tree2):
    with pytest.raises(UncertifiedError):
        tree2.vertex("a1" * 9)
    with pytest.raises(UncertifiedError):
        sphere_and_ball_counts(tree2, 9)


@pytest.mark.parametrize("bad", [
    {"vertices": 0, "edges": []},
    {"vertices": 2, "edges": [{"id": "e", "from": 0, "to": 0, "length": 1}]},
    {"vertices": 1, "edges": [{"id": "e", "from": 0, "to": 1, "length": 1}]},
    {"vertices": 1, "edges": [{"id": "e", "from": 0, "to": 0, "length": 0}]},
    {"vertices": 1, "edges": [{"id": "e", "from": 0, "to": 0}, {"id": "e", "from": 0, "to": 0}]},
    {"edges": []},
])
def test_validate_graph_rejects(bad):
    with pytest.raises(GraphValidationError):
        validate_graph(bad)


def test_description_round_trip(tmp_path):
    for name in ("tree(3)", "doubled(2)", "rotation_t4", "tufted_ray(exp,5)"):
        desc = build_example(name).description
        path = tmp_path / "space.json"
        path.write_text(json.dumps(desc.to_dict()))
        again = SpaceDescription.load(path)
        assert again.to_dict() == desc.to_dict()
        assert again.basepoint == desc.basepoint


def test_truncated_description_refuses_large_radius():
    with pytest.raises(UncertifiedError):
        build_example("tufted_ray(exp,5)").expand(6)


def test_group_law_with_extension():
    spec = build_example("rotation_t4").description.group
    assert spec.finite_order == 2
    swap = spec.extension[1]
    g = spec.element("a1a2", swap)
    h = spec.element("A1", None)
    # the swap moves A1 to A2 before concatenation
    assert multiply(g, h, spec).word == parse_word("a1")
    assert multiply(h, g, spec).word == parse_word("a2")
    e = multiply(g, inverse(g, spec), spec)
    assert e.word == () and e.perm is None


def test_group_rejects_bad_permutation():
    with pytest.raises(GraphValidationError):
        GroupSpec(2, ((1, 0, 2, 3, 9),))
    with pytest.raises(GraphValidationError):
        GroupSpec(2, ((2, 1, 0, 3),))


def _brute_pack(D, r):
    n = len(D)
    for k in range(n, 0, -1):
        for S in itertools.combinations(range(n), k):
            if all(D[i][j] > r for i, j in itertools.combinations(S, 2)):
                return k
    return 0


def _brute_cover(D, r):
    n = len(D)
    for k in range(1, n + 1):
        for S in itertools.combinations(range(n), k):
            if all(any(D[i][j] <= r for i in S) for j in range(n)):
                return k
    return 0


@st.composite
def point_sets(draw):
    n = draw(st.integers(1, 8))
    pts = draw(st.lists(st.tuples(st.integers(0, 12), st.integers(0, 12)), min_size=n, max_size=n))
    return [[Fraction(abs(p[0] - q[0]) + abs(p[1] - q[1]), 2) for q in pts] for p in pts]


@given(point_sets(), st.sampled_from([Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(3)]))
def test_packing_and_covering_match_brute_force(D, r):
    pack, cov = packing_number(D, r), covering_number(D, r)
    assert pack.exact and cov.exact
    assert pack.value == _brute_pack(D, r)
    assert cov.value == _brute_cover(D, r)


def test_greedy_counts_are_flagged():
    D = [[Fraction(abs(i - j)) for j in range(30)] for i in range(30)]
    pack = packing_number(D, 2)
    cov = covering_number(D, 1)
    assert not pack.exact and not cov.exact
    assert pack.value == 10 and cov.value == 10
