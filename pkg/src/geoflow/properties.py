"""Seeded property checks run by the regression table.

The test suite covers the same statements with hypothesis; these fixed-seed
versions keep ``verify-table`` deterministic.
"""
from __future__ import annotations

import random
from fractions import Fraction
from typing import NamedTuple

from .flow import WeightFunction, d_f, weight_tail_bound
from .paths import GeodesicPath, flow_shift, point_at, translate_path
from .space import CoverPatch, GraphPoint, covering_number, packing_number
from .symbolic import local_geodesic_shift

EPS = 1e-12


class PropertyResult(NamedTuple):
    name: str
    passed: bool
    cases: int
    detail: str = ""


def random_periodic_line(patch: CoverPatch, rng: random.Random, max_len: int = 4,
                         start_radius: int = 2) -> GeodesicPath:
    """A random vertex-anchored periodic local geodesic near the basepoint."""
    shift = local_geodesic_shift(patch.base)
    keys = [k for k, d in zip(patch.keys, patch.dist.tolist()) if d <= start_radius * patch.scale]
    while True:
        m = rng.randint(1, max_len)
        state = rng.randrange(shift.n_states)
        word = [shift.states[state][-1]]
        for _ in range(m - 1):
            state = rng.choice(shift.successors[state])
            word.append(shift.states[state][-1])
        if word[0] != patch.base.reverse(word[-1]) and patch.base.side_tail(word[0]) == 0:
            break
    start = rng.choice([k for k in keys if patch.split_key(k)[0] == 0])
    return GeodesicPath.periodic(start, word)


def _random_group_word(patch: CoverPatch, rng: random.Random, length: int) -> tuple[int, ...]:
    word: list[int] = []
    for _ in range(length):
        s = rng.randrange(2 * patch.group.rank)
        if word and s == word[-1] ^ 1:
            continue
        word.append(s)
    return tuple(word)


def packing_chain(patch: CoverPatch, cases: int = 100, seed: int = 0) -> PropertyResult:
    """``Pack(2r) <= Cov(r) <= Pack(r)`` on random vertex sets with exact counts."""
    rng = random.Random(seed)
    pool = [GraphPoint(k) for k, d in zip(patch.keys, patch.dist.tolist()) if d <= 3 * patch.scale]
    radii = [Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(2), Fraction(3)]
    for i in range(cases):
        pts = rng.sample(pool, rng.randint(1, min(14, len(pool))))
        r = rng.choice(radii)
        D = [[patch.distance(p, q) for q in pts] for p in pts]
        p2, c, p1 = packing_number(D, 2 * r), covering_number(D, r), packing_number(D, r)
        if not (p2.exact and c.exact and p1.exact):
            return PropertyResult("packing chain", False, i, "count not exact")
        if not p2.value <= c.value <= p1.value:
            return PropertyResult("packing chain", False, i, f"r={r}: {p2.value}, {c.value}, {p1.value}")
    return PropertyResult("packing chain", True, cases)


def sandwich(patch: CoverPatch, cases: int = 100, seed: int = 0, W: int = 4) -> PropertyResult:
    """``d(g(0), g'(0)) <= lo(D_f)`` and ``hi(D_f) <= d(g(0), g'(0)) + sup 2|s| f(s)``."""
    rng = random.Random(seed)
    for i in range(cases):
        f = WeightFunction(rng.choice([1, 2]))
        g1 = flow_shift(random_periodic_line(patch, rng), Fraction(rng.randrange(4), 4))
        g2 = flow_shift(random_periodic_line(patch, rng), Fraction(rng.randrange(4), 4))
        d0 = float(patch.distance(point_at(patch, g1, 0), point_at(patch, g2, 0)))
        iv = d_f(patch, g1, g2, W, f)
        if not (d0 <= iv.lo + EPS and iv.hi <= d0 + weight_tail_bound(f, 0) + EPS):
            return PropertyResult("D_f sandwich", False, i, f"d0={d0}, interval={iv[:2]}")
    return PropertyResult("D_f sandwich", True, cases)


def flow_group_law(patch: CoverPatch, cases: int = 100, seed: int = 0) -> PropertyResult:
    """``Phi_t Phi_s = Phi_{s+t}``, compared as paths and pointwise."""
    rng = random.Random(seed)
    for i in range(cases):
        g = random_periodic_line(patch, rng)
        s = Fraction(rng.randint(-12, 12), 4)
        t = Fraction(rng.randint(-12, 12), 4)
        a, b = flow_shift(flow_shift(g, s), t), flow_shift(g, s + t)
        u = Fraction(rng.randint(-8, 8), 4)
        if a != b or point_at(patch, a, u) != point_at(patch, g, s + t + u):
            return PropertyResult("flow group law", False, i, f"s={s}, t={t}")
    return PropertyResult("flow group law", True, cases)


def deck_isometry(patch: CoverPatch, cases: int = 50, seed: int = 0, W: int = 3) -> PropertyResult:
    """``D_f(g gamma, g gamma') = D_f(gamma, gamma')`` for random deck elements ``g``."""
    rng = random.Random(seed)
    for i in range(cases):
        f = WeightFunction(rng.choice([1, 2]))
        g1 = random_periodic_line(patch, rng, start_radius=1)
        g2 = random_periodic_line(patch, rng, start_radius=1)
        g = _random_group_word(patch, rng, rng.randint(1, 2))
        before = d_f(patch, g1, g2, W, f)
        after = d_f(patch, translate_path(patch, g, g1), translate_path(patch, g, g2), W, f)
        if abs(before.lo - after.lo) > EPS or abs(before.hi - after.hi) > EPS:
            return PropertyResult("deck isometry", False, i, f"{before[:2]} vs {after[:2]}")
    return PropertyResult("deck isometry", True, cases)
