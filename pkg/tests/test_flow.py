import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from geoflow import (BoundaryPoint, GeodesicPath, WeightFunction, bowen_distance, d_f, d_f_dyn,
                     flow_shift, k_tau_check, limit_schedule, quotient_d_f, separated_set_check,
                     weight_tail_bound)
from geoflow.exceptions import UncertifiedError
from geoflow.flow import tail_majorant
from geoflow.paths import EdgeWord, point_at, translate_path
from geoflow.symbolic import local_geodesic_shift


def sides(patch, text):
    return patch.base.parse_sides(text)


def diverging_pair(patch):
    """``(a1)^inf`` and the line that follows it up to time 0 and then turns into ``a2``."""
    a1 = GeodesicPath.periodic(0, sides(patch, "a1"))
    turn = GeodesicPath.from_words(0, EdgeWord((), sides(patch, "a2")), EdgeWord((), sides(patch, "a1")))
    return a1, turn


@given(st.sampled_from([1, 2, 3, Fraction(1, 2)]), st.fractions(0, 6, max_denominator=8))
def test_tail_bound_matches_grid(a, S):
    f = WeightFunction(a)
    s = np.linspace(float(S), float(S) + 60, 200_001)
    grid = float(np.max(2 * s * np.exp(-float(a) * s)))
    bound = weight_tail_bound(f, S)
    assert bound >= grid - 1e-12
    assert bound == pytest.approx(grid, abs=1e-6)


@given(st.fractions(0, 3, max_denominator=4), st.integers(0, 4), st.sampled_from([1, 2]))
def test_tail_majorant_matches_grid(c, W, a):
    f = WeightFunction(a)
    v = np.linspace(W, W + 60, 200_001)
    grid = float(np.max((float(c) + 2 * (v - W)) * np.exp(-a * v)))
    assert tail_majorant(c, W, f) == pytest.approx(grid, abs=1e-6)
    assert tail_majorant(c, W, f) >= grid - 1e-12


def test_weight_function_class():
    assert WeightFunction(1).check_class()
    assert WeightFunction(2)(0) == 1.0
    with pytest.raises(ValueError):
        WeightFunction(0)
    with pytest.raises(ValueError):
        weight_tail_bound(WeightFunction(1), -1)


@pytest.mark.parametrize("a", [1, 2])
def test_diverging_pair_closed_form(tree2, a):
    g1, g2 = diverging_pair(tree2)
    iv = d_f(tree2, g1, g2, W=6, f=WeightFunction(a))
    target = 2 / (a * math.e)
    assert iv.lo <= target + 1e-12 <= iv.hi + 2e-12
    assert iv.hi - iv.lo < 1e-9
    assert iv.witness == Fraction(1, a)


def test_shifted_copy_is_constant_distance(tree2):
    g = GeodesicPath.periodic(0, sides(tree2, "a1a2"))
    iv = d_f(tree2, g, flow_shift(g, Fraction(1, 2)))
    assert iv.lo == pytest.approx(0.5) and iv.hi == pytest.approx(0.5)
    assert d_f(tree2, g, g) == (0.0, 0.0, Fraction(0))


def test_dynamic_metric_closed_form(tree2):
    g1, g2 = diverging_pair(tree2)
    # D_f(Phi_t) = 2 e^{t-1} on [0, 1] and 2t beyond, for a = 1
    for T, target in ((Fraction(1, 2), 2 * math.exp(-0.5)), (1, 2.0), (2, 4.0)):
        iv = d_f_dyn(tree2, g1, g2, T, W=6)
        assert iv.lo <= target + 1e-9 and iv.hi >= target - 1e-9
        assert iv.hi - iv.lo < 1e-6


def test_quotient_metric_forgets_translation(tree2):
    g1, g2 = diverging_pair(tree2)
    word = tuple(tree2.split_key(tree2.vertex("a2A1").vertex)[1])
    q = quotient_d_f(tree2, g1, g2)
    moved = quotient_d_f(tree2, translate_path(tree2, word, g1), g2)
    assert q.lo == pytest.approx(moved.lo) and q.hi == pytest.approx(moved.hi)
    assert q.hi <= d_f(tree2, g1, g2).hi + 1e-12
    same = quotient_d_f(tree2, translate_path(tree2, word, g1), g1)
    assert same.hi == 0.0


def test_bowen_distance_monotone(tree2):
    g1, g2 = diverging_pair(tree2)
    f = WeightFunction(1)
    prev = 0.0
    for n in range(4):
        iv = bowen_distance(tree2, g1, g2, n, f=f)
        assert iv.lo >= prev - 1e-12
        prev = iv.lo
    assert bowen_distance(tree2, g1, g2, 0, f=f).lo == pytest.approx(quotient_d_f(tree2, g1, g2, 0, 4, f).lo)


def test_point_at_follows_words(tree2):
    g = GeodesicPath.periodic(0, sides(tree2, "a1a2"))
    assert point_at(tree2, g, 2) == tree2.vertex("a1a2")
    assert point_at(tree2, g, -1) == tree2.vertex("A2")
    mid = point_at(tree2, g, Fraction(1, 2))
    assert tree2.distance(mid, tree2.basepoint) == Fraction(1, 2)


@pytest.mark.parametrize("a", [1, 2])
def test_coded_lines_separated(tree2, a):
    shift = local_geodesic_shift(tree2.base)
    for n in (1, 2):
        chk = separated_set_check(tree2, shift, n, Fraction(1, 3), WeightFunction(a))
        assert chk.passed and chk.min_distance > 1 / 3
        assert chk.n_words == 4 * 3 ** (n - 1)


def test_separation_fails_above_attained_minimum(tree2):
    shift = local_geodesic_shift(tree2.base)
    chk = separated_set_check(tree2, shift, 1, Fraction(3), WeightFunction(1))
    assert not chk.passed and chk.worst_pair is not None


def test_schedule_grid_and_windows(tree2):
    z = BoundaryPoint.parse("(a1a2)")
    rep = limit_schedule(tree2, z, 0, 6, grid_step=1, c=1, eps=Fraction(1, 2), n=1)
    assert rep.grid_pass and rep.grid_checked == 6
    assert rep.window_pass
    assert [a for a, _ in rep.returns] == list(range(7))
    with pytest.raises(UncertifiedError):
        limit_schedule(tree2, z, 0, 2, c=1, eps=Fraction(1, 2), n=3)
    with pytest.raises(TypeError):
        limit_schedule(tree2, "(a1a2)", 0, 6)


def test_schedule_detects_missing_returns():
    from geoflow import build_example
    patch = build_example("tufted_ray(const,8)").expand(8)
    z = BoundaryPoint.parse({"head": "l9l10l11l12l13l14l15l16", "period": ""})
    rep = limit_schedule(patch, z, 0, 6, grid_step=1)
    assert rep.grid_pass is False


def test_k_tau(tree2):
    g = GeodesicPath.periodic(0, sides(tree2, "a1A2"))
    assert k_tau_check(tree2, g, 0)
    off = GeodesicPath.periodic(0, sides(tree2, "a1A2"), Fraction(1, 2))
    assert not k_tau_check(tree2, off, Fraction(1, 4))
    assert k_tau_check(tree2, off, Fraction(1, 2))
