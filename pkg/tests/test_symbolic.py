import itertools
import json
import math

import pytest
from hypothesis import given, strategies as st

from geoflow import (UncertifiedError, build_example, enumerate_words, geodesic_shift,
                     local_geodesic_shift, quotient_coding, sft_entropy, word_count)
from geoflow.symbolic import (InvolutiveAlphabet, SymbolPartition, entropy_profile, higher_block,
                              is_realizing, shift_from_words)


def reduced_words(ell, n):
    """Brute force: side words of the rose with no ``s s-bar`` factor."""
    sides = range(2 * ell)
    return [w for w in itertools.product(sides, repeat=n)
            if all(w[i + 1] != w[i] ^ 1 for i in range(n - 1))]


@pytest.mark.parametrize("ell", [2, 3, 4])
def test_rose_entropy_exact(ell):
    h = sft_entropy(local_geodesic_shift(build_example(f"wedge({ell})").base))
    assert h.exact and h.lo == h.hi
    assert h.value == pytest.approx(math.log(2 * ell - 1), abs=1e-15)


@pytest.mark.parametrize("ell,n", [(2, 1), (2, 4), (3, 3), (2, 6)])
def test_word_count_matches_enumeration(ell, n):
    shift = local_geodesic_shift(build_example(f"wedge({ell})").base)
    brute = reduced_words(ell, n)
    assert word_count(shift, n) == len(brute) == 2 * ell * (2 * ell - 1) ** (n - 1)
    assert list(enumerate_words(shift, 0, n - 1)) == sorted(brute)


def test_single_circle_has_zero_entropy():
    h = sft_entropy(local_geodesic_shift(build_example("wedge(1)").base))
    assert h.exact and h.value == 0.0


def test_doubled_geodesic_shift():
    patch = build_example("doubled(2)").expand(4)
    shift = geodesic_shift(patch, 2)
    h = sft_entropy(shift)
    assert h.exact and h.value == pytest.approx(math.log(6), abs=1e-15)
    # a1 t1-bar closes a bigon of length 2 between the same endpoints
    a1, T1 = patch.base.side_by_label("a1"), patch.base.side_by_label("T1")
    assert not is_realizing(patch, (a1, T1))
    assert (a1, T1) in shift.forbidden
    # the local geodesic shift allows the bigon and grows faster
    assert sft_entropy(local_geodesic_shift(patch.base)).value == pytest.approx(math.log(7))


def test_geodesic_shift_on_tree_equals_local_shift(tree2):
    for L in (2, 3, 4):
        assert sft_entropy(geodesic_shift(tree2, L)).value == pytest.approx(math.log(3), abs=1e-15)
    profile = entropy_profile(tree2, [2, 4])
    assert profile["stable"][2]


def test_geodesic_shift_window_limits(tree2):
    with pytest.raises(ValueError):
        geodesic_shift(tree2, 1)
    with pytest.raises(UncertifiedError):
        geodesic_shift(tree2, 9)


def test_circle_rose_and_wedge3_agree():
    a = sft_entropy(local_geodesic_shift(build_example("circle_rose(2)").base))
    b = sft_entropy(local_geodesic_shift(build_example("wedge(3)").base))
    assert a.exact and b.exact and a.value == b.value == pytest.approx(math.log(5), abs=1e-15)


def test_rotation_quotient_collapses():
    spec = build_example("rotation_t4")
    shift = local_geodesic_shift(spec.base)
    q = quotient_coding(shift, spec.partition)
    h = sft_entropy(q)
    assert h.exact and h.value == 0.0
    assert q.n_states == 1
    assert sft_entropy(shift).value == pytest.approx(math.log(3), abs=1e-15)


def test_identity_partition_keeps_entropy():
    base = build_example("wedge(2)").base
    shift = local_geodesic_shift(base)
    alpha = InvolutiveAlphabet.from_graph(base)
    q = quotient_coding(shift, SymbolPartition.identity(alpha))
    assert sft_entropy(q).value == pytest.approx(math.log(3), abs=1e-15)


def test_inverse_pairs_partition():
    # classes {a1, A1}, {a2, A2}: the image is the full 2-shift
    base = build_example("wedge(2)").base
    part = SymbolPartition.from_labels(base, [["a1", "A1"], ["a2", "A2"]])
    q = quotient_coding(local_geodesic_shift(base), part)
    assert sft_entropy(q).value == pytest.approx(math.log(2), abs=1e-15)


@given(st.integers(2, 4), st.integers(1, 7))
def test_higher_block_preserves_counts(window, n):
    shift = local_geodesic_shift(build_example("wedge(2)").base)
    hb = higher_block(shift, window)
    if n >= window:
        assert word_count(hb, n) == word_count(shift, n)
    assert sft_entropy(hb).value == pytest.approx(math.log(3), abs=1e-12)


def test_shift_json_is_stable():
    shift = local_geodesic_shift(build_example("wedge(2)").base)
    data = json.loads(shift.to_json())
    assert data["states"] == ["a1", "A1", "a2", "A2"]
    assert len(data["transitions"]) == 12
    assert shift.to_json() == local_geodesic_shift(build_example("wedge(2)").base).to_json()


def test_empty_and_periodic_shifts():
    empty = shift_from_words(("x", "y"), [(0, 1)])
    assert empty.is_empty and word_count(empty, 3) == 0
    assert math.isnan(sft_entropy(empty).value)
    cycle = shift_from_words(("x", "y"), [(0, 1), (1, 0)])
    h = sft_entropy(cycle)
    assert h.exact and h.value == 0.0
    with pytest.raises(ValueError):
        shift_from_words(("x",), [(0,)])


def test_non_constant_row_sums_bracket():
    # golden mean shift: rho = (1 + sqrt 5) / 2
    golden = shift_from_words(("0", "1"), [(0, 0), (0, 1), (1, 0)])
    h = sft_entropy(golden, tol=1e-12)
    target = math.log((1 + math.sqrt(5)) / 2)
    assert h.lo <= target <= h.hi
    assert h.hi - h.lo <= 1e-12
