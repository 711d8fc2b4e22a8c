import math
from fractions import Fraction

import pytest

from geoflow import (CylinderSet, GeoflowError, GraphPoint, UncertifiedError, WeightFunction,
                     bowen_cover_estimate, build_example, covering_entropy_estimate, covering_number,
                     critical_exponent_estimate, f_entropy_estimate, geodesic_covering_entropy_estimate,
                     local_geodesic_shift, weight_tail_bound, window_margin)
from geoflow.entropy import bucket_density_check

THIRD = Fraction(1, 3)


def net_points(patch, T):
    """Vertices and edge midpoints within ``T`` of the basepoint, built without the estimator's net."""
    pts = {}
    for k, d in zip(patch.keys, patch.dist.tolist()):
        if d > T:
            continue
        pts[("v", k)] = GraphPoint(k)
        for s, k2, _ in patch.neighbors(k):
            m = patch.point_on(k, s, Fraction(1, 2))
            if patch.dist_to_base(m) <= T:
                pts.setdefault(("m", patch._edge_id(m)), m)
    return list(pts.values())


def exact_cover(patch, T, r):
    pts = net_points(patch, T)
    D = [[patch.distance(p, q) for q in pts] for p in pts]
    c = covering_number(D, r, exact_cap=40)
    assert c.exact
    return c.value


def test_orbit_counts_closed_form(tree2):
    rep = critical_exponent_estimate(tree2, range(1, 8))
    assert rep.count_lo == [1 + 2 * (3 ** T - 1) for T in range(1, 8)]
    assert all(rep.exact)
    assert rep.slope_lo == rep.slope_hi == rep.slope


def test_rotation_orbit_equals_tree_orbit(tree2):
    rot = build_example("rotation_t4").expand(6)
    a = critical_exponent_estimate(rot, range(1, 7)).count_lo
    assert a == critical_exponent_estimate(tree2, range(1, 7)).count_lo


@pytest.mark.parametrize("name,T", [("tree(2)", 1), ("tree(2)", Fraction(3, 2)),
                                    ("tufted_ray(exp,6)", 2), ("tufted_ray(exp,6)", 3)])
def test_tree_cover_matches_exact_search(name, T):
    patch = build_example(name).expand(6)
    rep = covering_entropy_estimate(patch, Fraction(1, 2), [T])
    oracle = exact_cover(patch, T, Fraction(1, 2))
    assert rep.count_lo[0] <= oracle == rep.count_hi[0]


def test_doubled_cover_brackets_exact_search(doubled2):
    rep = covering_entropy_estimate(doubled2, Fraction(1, 2), [1])
    oracle = exact_cover(doubled2, 1, Fraction(1, 2))
    assert rep.count_lo[0] <= oracle <= rep.count_hi[0]


def test_covering_radius_requirements(tree2):
    with pytest.raises(UncertifiedError):
        covering_entropy_estimate(tree2, Fraction(1, 2), [8])
    with pytest.raises(ValueError):
        covering_entropy_estimate(tree2, 0, [2])
    with pytest.raises(GeoflowError):
        covering_entropy_estimate(build_example("tree(2)").expand(2), Fraction(1, 2), [2])


def test_tufted_geodesic_cover_stays_on_the_line():
    patch = build_example("tufted_ray(exp,8)").expand(8)
    hgeod = geodesic_covering_entropy_estimate(patch, horizons=range(2, 5))
    # the line segment [-T, T] at half steps, covered by balls of radius 1/2
    assert hgeod.count_hi == [math.ceil((4 * T + 1) / 3) for T in range(2, 5)]
    hcov = covering_entropy_estimate(patch, horizons=range(2, 5))
    assert all(a < b for a, b in zip(hgeod.count_hi, hcov.count_lo))


def test_hull_restricted_cover_on_tree(tree2):
    full = geodesic_covering_entropy_estimate(tree2, horizons=[2, 3])
    plain = covering_entropy_estimate(tree2, horizons=[2, 3])
    assert full.count_hi == plain.count_hi
    cyl = geodesic_covering_entropy_estimate(tree2, CylinderSet.parse(["a1"]), horizons=[2, 3])
    assert all(c < f for c, f in zip(cyl.count_hi, full.count_hi))


def test_window_margin():
    assert window_margin(WeightFunction(1), THIRD) == 6
    assert window_margin(WeightFunction(2), THIRD) == 3
    for a in (1, 2, 3):
        f = WeightFunction(a)
        k = window_margin(f, THIRD)
        assert weight_tail_bound(f, k - 1) < 1 / 12 <= weight_tail_bound(f, k - 2)


@pytest.mark.parametrize("a", [1, 2])
def test_bowen_brackets_small_horizons(tree2, a):
    rep = bowen_cover_estimate(tree2, range(0, 4), THIRD, WeightFunction(a))
    k = rep.meta["k_r"]
    assert k == window_margin(WeightFunction(a), THIRD)
    assert rep.count_lo == [1, 4, 12, 36]
    for n, lo, hi in zip(rep.horizons, rep.count_lo, rep.count_hi):
        assert lo <= hi == 6 * 4 * 3 ** (n + 2 * k - 1)
        assert lo >= 4 * 3 ** (n - 2)
    assert all(rep.exact)
    sep = min(rep.meta["separation"].values())
    assert sep == pytest.approx(2 / (a * math.e), abs=1e-9)
    assert rep.meta["lower_covers_r"] is (sep > 2 / 3)


def test_bowen_flags_unverified_horizons(tree2):
    rep = bowen_cover_estimate(tree2, range(1, 4), verify_separation=2)
    assert rep.exact == [True, True, False]


def test_bowen_rejects_bad_input(tree2):
    with pytest.raises(GeoflowError):
        bowen_cover_estimate(build_example("tufted_ray(exp,4)").expand(4), [1])
    with pytest.raises(ValueError):
        bowen_cover_estimate(tree2, [1], r=1)
    with pytest.raises(ValueError):
        bowen_cover_estimate(tree2, [1], strategy="magic")


def test_bucket_density_sample(tree2):
    fails, worst = bucket_density_check(tree2, local_geodesic_shift(tree2.base), 1, THIRD,
                                        WeightFunction(2), samples=2)
    assert fails == 0 and worst < 1 / 3


def test_exact_strategy_cross_check(tree2):
    rep = bowen_cover_estimate(tree2, [1], strategy="exact")
    bucket = bowen_cover_estimate(tree2, [1])
    assert bucket.count_lo[0] <= rep.count_hi[0] <= bucket.count_hi[0]
    assert not any(rep.exact)


def test_f_entropy_full_boundary(tree2):
    rep = f_entropy_estimate(tree2, horizons=range(1, 6))
    assert rep.count_lo == [4 * 3 ** (n - 1) for n in range(1, 6)]
    assert rep.slope_lo == pytest.approx(math.log(3), abs=1e-12)
    assert rep.slope_hi == pytest.approx(math.log(3), abs=1e-12)


def test_f_entropy_cylinder_and_points():
    cyl = f_entropy_estimate(2, C=CylinderSet.parse(["a1"]), R=1, horizons=range(1, 6))
    assert cyl.count_lo == [3 ** n for n in range(1, 6)]
    empty = f_entropy_estimate(2, C=CylinderSet.parse(["a1"]), R=0, horizons=range(1, 4))
    assert empty.meta.get("empty") and math.isnan(empty.slope)
    from geoflow import BoundaryPoint
    pts = f_entropy_estimate(2, C=[BoundaryPoint.parse("(a1)"), BoundaryPoint.parse("(a2)")],
                             horizons=range(1, 6))
    assert pts.slope_hi == pytest.approx(0, abs=1e-12)
