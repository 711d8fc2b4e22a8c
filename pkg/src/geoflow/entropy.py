"""Growth-rate estimators: critical exponent, covering entropies, Bowen and f-entropy.

Every estimator returns an :class:`~geoflow.report.EntropyReport` holding the
per-horizon counts (exact where flagged) and the fitted slope.
"""
from __future__ import annotations

import itertools
import math
import random
from collections import deque
from fractions import Fraction
from typing import Sequence

from .exceptions import BudgetExceeded, GeoflowError, UncertifiedError
from .flow import (WeightFunction, bowen_distance, separated_set_check, weight_tail_bound,
                   word_lines)
from .hyperbolic import BoundaryPoint, CylinderSet, _GeneralHull, _inv, qc_hull_contains
from .paths import DistanceOracle, EdgeWord, GeodesicPath, extend_to_line, flow_shift
from .report import EntropyReport
from .space import CoverPatch, GraphPoint, as_fraction, orbit_count
from .symbolic import ShiftSpace, enumerate_words, local_geodesic_shift, word_count


def critical_exponent_estimate(patch: CoverPatch, horizons: Sequence = None) -> EntropyReport:
    """Slope of ``log #(orbit in B(x, T))`` against ``T``; counts are exact."""
    if horizons is None:
        horizons = range(1, math.floor(patch.radius) + 1)
    rep = EntropyReport("hcrit", config={"R": str(patch.radius)})
    for T in horizons:
        rep.add(T, orbit_count(patch, T))
    return rep.fit()


# ---------------------------------------------------------------------------
# covering numbers on the vertex/midpoint net
# ---------------------------------------------------------------------------

class _Net:
    """Vertices and edge midpoints of ``B(x, T)`` joined at half-unit steps.

    Net distances equal the path metric between net points, so closed balls of
    radius ``r`` are ``floor(2r)``-step neighbourhoods.
    """

    def __init__(self, patch: CoverPatch, T_max):
        if not patch.base.is_unit:
            raise GeoflowError("net covering needs unit edge lengths")
        self.patch = patch
        self.nodes: list[tuple] = []  # ("v", key) or ("m", edge id)
        self.level: list[int] = []    # twice the distance to x
        self.adj: list[list[int]] = []
        T2 = 2 * as_fraction(T_max)
        index: dict = {}
        dist = dict(zip(patch.keys, patch.dist.tolist()))

        def node(tag, ident, lev):
            i = index.get((tag, ident))
            if i is None:
                i = index[(tag, ident)] = len(self.nodes)
                self.nodes.append((tag, ident))
                self.level.append(lev)
                self.adj.append([])
            return i

        for k, d in dist.items():
            if 2 * d <= T2:
                node("v", k, 2 * d)
        for k, d in dist.items():
            if 2 * d > T2:
                continue
            for s, k2, _ in patch.neighbors(k):
                if k2 == k:
                    eid = min((k, s), (k, s ^ 1))
                else:
                    eid = min((k, s), (k2, s ^ 1))
                d2 = dist.get(k2)
                lev = 2 * min(d, d2 if d2 is not None else d) + 1
                if lev > T2:
                    continue
                m = node("m", eid, lev)
                a = index[("v", k)]
                if a not in self.adj[m]:
                    self.adj[m].append(a)
                    self.adj[a].append(m)
        self.index = index

    def point(self, i: int) -> GraphPoint:
        tag, ident = self.nodes[i]
        if tag == "v":
            return GraphPoint(ident)
        k, s = ident
        return self.patch.point_on(k, s, Fraction(1, 2))

    def ball(self, i: int, steps: int) -> list[int]:
        if steps == 1:
            return [i] + self.adj[i]
        seen = {i: 0}
        todo = deque([i])
        while todo:
            u = todo.popleft()
            if seen[u] == steps:
                continue
            for v in self.adj[u]:
                if v not in seen:
                    seen[v] = seen[u] + 1
                    todo.append(v)
        return list(seen)


def _greedy_cover(net: _Net, members: list[int], steps: int) -> int:
    """Cover ``members`` by balls centred in ``members``, farthest uncovered point first.

    Each new centre is the member of the uncovered point's ball closest to ``x``;
    on trees this is the classical optimal rule.
    """
    inside = set(members)
    covered: set[int] = set()
    count = 0
    for u in sorted(members, key=lambda i: (-net.level[i], net.nodes[i])):
        if u in covered:
            continue
        c = min((j for j in net.ball(u, steps) if j in inside),
                key=lambda j: (net.level[j], net.nodes[j]))
        covered.update(net.ball(c, steps))
        count += 1
    return count


def _greedy_packing(net: _Net, members: list[int], steps: int) -> int:
    """Greedy set of members pairwise more than ``steps`` half-units apart, far points first."""
    blocked: set[int] = set()
    order = sorted(members, key=lambda i: (-net.level[i], net.nodes[i]))
    count = 0
    for i in order:
        if i in blocked:
            continue
        count += 1
        blocked.update(net.ball(i, steps))
    return count


def _covering_report(patch, quantity, r, horizons, keep=None, fit="loglinear", **config) -> EntropyReport:
    r = as_fraction(r)
    if r <= 0:
        raise ValueError("r must be positive")
    horizons = list(horizons)
    # a geodesic between net points of B(x, T) at distance <= r stays in B(x, T + r/2)
    if max(horizons) + r / 2 > patch.radius:
        raise UncertifiedError("horizons too large for the patch")
    net = _Net(patch, max(horizons) + r / 2)
    steps = math.floor(2 * r)
    members_all = [i for i in range(len(net.nodes)) if keep is None or keep(net, i)]
    rep = EntropyReport(quantity, config={"r": r, "R": str(patch.radius), **config})
    for T in horizons:
        T2 = 2 * as_fraction(T)
        members = [i for i in members_all if net.level[i] <= T2]
        if not members:
            rep.add(T, 0, 0, exact=True)
            continue
        hi = _greedy_cover(net, members, steps)
        lo = _greedy_packing(net, members, 2 * steps)
        rep.add(T, lo, hi, exact=lo == hi)
    return rep.fit(fit)


def covering_entropy_estimate(patch: CoverPatch, r=Fraction(1, 2), horizons: Sequence = None,
                              fit: str = "loglinear") -> EntropyReport:
    """``Cov(B(x, T), r)`` on the vertex/midpoint net: greedy cover above, greedy ``2r``-packing below."""
    if horizons is None:
        horizons = range(2, math.floor(patch.radius) - 1)
    return _covering_report(patch, "hcov", r, horizons, fit=fit)


def geodesic_covering_entropy_estimate(patch: CoverPatch, C: CylinderSet | None = None, r=Fraction(1, 2),
                                       horizons: Sequence = None, fit: str = "loglinear") -> EntropyReport:
    """As :func:`covering_entropy_estimate` restricted to the hull of ``C`` (whole boundary by default)."""
    C = C or CylinderSet.full()
    if horizons is None:
        horizons = range(2, math.floor(patch.radius) - 3)
    general = None
    from .hyperbolic import _tree_core
    if _tree_core(patch) is None:
        general = _GeneralHull(patch)

    def keep(net, i):
        return qc_hull_contains(patch, C, net.point(i), general)

    return _covering_report(patch, "hgeod", r, horizons, keep, fit=fit,
                            C=[list(p) for p in C.prefixes])


# ---------------------------------------------------------------------------
# Bowen covering entropy of the quotient geodesic flow
# ---------------------------------------------------------------------------

def window_margin(f: WeightFunction, r) -> int:
    """Smallest ``k >= 1`` with ``sup_{|s| >= k-1} 2|s| f(s) < r/4``."""
    r = as_fraction(r)
    k = 1
    while weight_tail_bound(f, k - 1) >= float(r) / 4:
        k += 1
    return k


def _grid_size(r) -> int:
    return math.ceil(2 / as_fraction(r))


def _bucket_line(patch, shift, window: Sequence[int], k: int) -> GeodesicPath:
    """Canonical line reading ``window`` on positions ``-k+1 .. len-k``."""
    fwd, bwd = extend_to_line(shift, window)
    start = patch.base.side_tail(window[0])
    return flow_shift(GeodesicPath.from_words(start, fwd, bwd), k - 1)


def bucket_density_check(patch: CoverPatch, shift: ShiftSpace, n: int, r, f: WeightFunction,
                         samples: int = 8, seed: int = 0, W=None) -> tuple[int, float]:
    """Sample lines and flow times; return ``(failures, worst upper bound)`` for the distance
    to their bucket representative in the quotient Bowen metric."""
    r = as_fraction(r)
    k = window_margin(f, r)
    rng = random.Random(seed)
    grid = _grid_size(r)
    oracle = DistanceOracle(patch)
    W = k + 2 if W is None else W
    worst, fails = 0.0, 0
    for _ in range(samples):
        m = 3
        state = rng.randrange(shift.n_states)
        word = list(shift.states[state])
        while len(word) < n + 2 * k + 2 * m:
            state = rng.choice(shift.successors[state])
            word.append(shift.states[state][-1])
        word = tuple(word)
        gamma = _bucket_line(patch, shift, word, k + m)
        t = Fraction(rng.randrange(0, 1000), 1000)
        j = min(range(1, grid + 1), key=lambda j: abs(t - r * j / 2))
        rep = _bucket_line(patch, shift, word[m:m + n + 2 * k], k)
        iv = bowen_distance(patch, flow_shift(gamma, t), flow_shift(rep, r * j / 2), n, W, f, oracle)
        worst = max(worst, iv.hi)
        fails += iv.hi >= float(r)
    return fails, worst


def bowen_cover_estimate(patch: CoverPatch, horizons: Sequence = range(1, 7), r=Fraction(1, 3),
                         f: WeightFunction | None = None, strategy: str = "bucket",
                         shift: ShiftSpace | None = None, verify_separation: int = 3,
                         density_samples: int = 0, seed: int = 0) -> EntropyReport:
    """Bracket ``Cov(quotient geodesics, r)`` in the Bowen metric ``max_{i<=n} D_f(Phi_i, Phi_i)``.

    ``bucket``: the upper count is the size of the explicit ``r``-dense set built
    from a time grid of step ``r/2`` times window words on ``n + 2k_r`` positions;
    the lower count is the size of the ``r``-separated set of lines coded by
    admissible ``n``-words, checked exactly up to ``verify_separation`` (later
    horizons are flagged inexact).  It bounds ``Pack(r)`` and ``Cov(r/2)``;
    ``meta["lower_covers_r"]`` records whether the observed separation also
    exceeds ``2r`` so that it bounds ``Cov(r)`` itself.
    ``exact``: greedy cover and ``r``-separated packing among lines coded by
    ``(n+1)``-words, a cross-check at tiny ``n`` (neither count is certified).
    """
    f = f or WeightFunction(2)
    r = as_fraction(r)
    if not 0 < r < 1:
        raise ValueError("r must lie in (0, 1)")
    shift = shift or local_geodesic_shift(patch.base)
    k = window_margin(f, r)
    rep = EntropyReport("bowen", config={"r": r, "a": f.a, "R": str(patch.radius), "seed": seed,
                                         "strategy": strategy}, meta={"k_r": k})
    if strategy == "bucket":
        if patch.base.n_vertices != 1 or not patch.base.is_unit:
            # the r-dense set needs unit edges and a quotient of diameter 1
            raise GeoflowError("bucket strategy needs a rose of unit loops")
        grid = _grid_size(r)
        diam = 1 + weight_tail_bound(f, 0)  # quotient graph diameter <= 1 plus the tail
        separation: dict[int, float] = {}
        for n in horizons:
            hi = grid * word_count(shift, n + 2 * k)
            if n == 0:
                lo, exact = 1, True
                if r > diam:
                    hi = 1
            else:
                lo, exact = word_count(shift, n), False
                if n <= verify_separation:
                    chk = separated_set_check(patch, shift, n, r, f)
                    separation[n] = chk.min_distance
                    exact = chk.passed
                    if not chk.passed:
                        lo = 1
            if density_samples and n >= 1:
                fails, worst = bucket_density_check(patch, shift, n, r, f, density_samples, seed)
                rep.meta.setdefault("density", {})[n] = {"failures": fails, "worst": worst}
            rep.add(n, lo, hi, exact)
        rep.meta["separation"] = separation
        # an r-separated set bounds Pack(r) and Cov(r/2); it bounds Cov(r) only past 2r
        rep.meta["lower_covers_r"] = bool(separation) and min(separation.values()) > 2 * float(r)
        return rep.fit()
    if strategy == "exact":
        oracle = DistanceOracle(patch)
        for n in horizons:
            words = list(enumerate_words(shift, 0, n))
            lines = word_lines(patch, shift, words)
            if len(lines) > 400:
                raise BudgetExceeded("exact strategy limited to 400 candidate lines")
            N = len(lines)
            lo_m = [[0.0] * N for _ in range(N)]
            hi_m = [[0.0] * N for _ in range(N)]
            for i, j in itertools.combinations(range(N), 2):
                iv = bowen_distance(patch, lines[i], lines[j], n, 4, f, oracle)
                lo_m[i][j] = lo_m[j][i] = iv.lo
                hi_m[i][j] = hi_m[j][i] = iv.hi
            covered, cover = set(), 0
            while len(covered) < N:
                best = max(range(N), key=lambda i: (sum(1 for j in range(N)
                                                        if j not in covered and hi_m[i][j] <= r), -i))
                covered.update(j for j in range(N) if hi_m[best][j] <= r)
                cover += 1
            chosen: list[int] = []
            for i in range(N):
                if all(lo_m[i][j] > r for j in chosen):
                    chosen.append(i)
            rep.add(n, len(chosen), cover, exact=False)
        return rep.fit()
    raise ValueError(f"unknown strategy {strategy!r}")


# ---------------------------------------------------------------------------
# f-entropy of boundary subsets on trees
# ---------------------------------------------------------------------------

def _letters(rank: int) -> list[str]:
    out = []
    for i in range(1, rank + 1):
        out += [f"a{i}", f"A{i}"]
    return out


def _reduced_words(letters, R: int):
    yield ()
    frontier = [()]
    for _ in range(R):
        nxt = []
        for w in frontier:
            for t in letters:
                if not w or t != _inv(w[-1]):
                    nxt.append(w + (t,))
        yield from nxt
        frontier = nxt


class _EndCounter:
    """Counts non-backtracking tree walks whose final direction can continue into ``C``."""

    def __init__(self, C: CylinderSet, letters, R: int):
        self.C = C
        self.letters = letters
        self.Lc = max(R, C.max_length) + 1
        self._ok: dict = {}

    def _end_ok(self, u, far, last) -> bool:
        key = (u, far, last)
        hit = self._ok.get(key)
        if hit is None:
            hit = False
            for t in self.letters:
                if t == _inv(last):
                    continue
                if u and not far and t == _inv(u[-1]):
                    hit = self.C.meets_complement(u)
                else:
                    hit = self.C.meets_cylinder(u + (t,))
                if hit:
                    break
            self._ok[key] = hit
        return hit

    def _step(self, u, far, t):
        if u and not far and t == _inv(u[-1]):
            return u[:-1], False
        u2 = u + (t,)
        if len(u2) > self.Lc:
            return u2[:self.Lc], True
        return u2, far

    def count(self, v: tuple, first: str, m: int) -> int:
        if m < 1:
            raise ValueError("walk length must be >= 1")
        states = {(*self._step(v, False, first), first): 1}
        for _ in range(m - 1):
            nxt: dict = {}
            for (u, far, last), c in states.items():
                for t in self.letters:
                    if t == _inv(last):
                        continue
                    u2, far2 = self._step(u, far, t)
                    key = (u2, far2, t)
                    nxt[key] = nxt.get(key, 0) + c
            states = nxt
        return sum(c for (u, far, last), c in states.items() if self._end_ok(u, far, last))


def _pair_line_vertices(z: BoundaryPoint, w: BoundaryPoint, R: int) -> int:
    """Vertices of the line joining ``z`` and ``w`` inside ``B(x, R)`` (tree)."""
    depth = 64
    p = 0
    while p < depth and z.label(p) == w.label(p):
        p += 1
    if p == depth:
        raise UncertifiedError("boundary points agree to depth 64")
    return sum(1 for i in range(p, R + 1)) + sum(1 for i in range(p + 1, R + 1))


def f_entropy_estimate(space, C=None, R: int = 0, r=Fraction(1, 3), f: WeightFunction | None = None,
                       horizons: Sequence = range(1, 11)) -> EntropyReport:
    """Bucket counts for ``Cov(Geod(B(x,R); C), r)`` under ``D_f^T`` on ``T_{2 rank}``.

    ``space`` is a tree-coded patch or the rank itself; ``C`` defaults to the
    whole boundary.

    Upper: time grid times windows on ``T + 2k_r`` positions of lines through
    ``B(x, R)`` at time 0 with both ends able to reach ``C``.  Lower: distinct
    forward ``T``-words at each anchor vertex, which are pairwise ``>= 1`` apart.
    """
    from .hyperbolic import is_tree_coded
    if isinstance(space, CoverPatch):
        if not is_tree_coded(space):
            raise GeoflowError("f-entropy needs a tree-coded space")
        rank = space.group.rank
    else:
        rank = int(space)
    f = f or WeightFunction(2)
    r = as_fraction(r)
    k = window_margin(f, r)
    grid = _grid_size(r)
    R = int(R)
    C = CylinderSet.full() if C is None else C
    rep = EntropyReport("ferg", config={"r": r, "a": f.a, "R": R}, meta={"k_r": k})
    if isinstance(C, BoundaryPoint):
        C = [C]
    if isinstance(C, (list, tuple)):
        pts = [BoundaryPoint.parse(z) for z in C]
        if len(pts) < 2:
            raise ValueError("C needs at least two boundary points")
        verts = sum(_pair_line_vertices(z, w, R) for z, w in itertools.combinations(pts, 2))
        for T in horizons:
            rep.add(T, 2 * verts, grid * 2 * verts, exact=False)
        return rep.fit()
    C = CylinderSet.parse(C)
    if not C.prefixes:
        raise ValueError("empty boundary set")
    letters = _letters(rank)
    counter = _EndCounter(C, letters, R)
    anchors = list(_reduced_words(letters, R))
    for T in horizons:
        hi = lo = 0
        for v in anchors:
            back = {b: counter.count(v, b, k) for b in letters}
            back1 = {b: counter.count(v, b, 1) for b in letters}
            for f1 in letters:
                fwd = counter.count(v, f1, T + k)
                hi += fwd * sum(c for b, c in back.items() if b != f1)
                if any(c for b, c in back1.items() if b != f1):
                    lo += counter.count(v, f1, T)
        rep.add(T, lo, grid * hi, exact=False)
    return rep.fit()
