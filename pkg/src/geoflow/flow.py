"""The ``D_f`` metrics on geodesic lines, their dynamical and quotient versions,
and return-time schedules of rays.

Suprema are resolved cell by cell: between consecutive vertex crossings of the
two paths the pointwise distance is a minimum of affine functions of the time,
so the weighted supremum is attained at a cell end, an envelope breakpoint or
the stationary point of ``(alpha + beta*s) * exp(-a*s)``.  Beyond the window a
closed-form tail majorant based on the 2-Lipschitz bound closes the interval.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

from .exceptions import BudgetExceeded, GeoflowError, UncertifiedError
from .paths import (DistanceOracle, GeodesicPath, PathWalker, extend_to_line, flow_shift,
                    point_at, translate_path)
from .space import CoverPatch, GraphPoint, as_fraction, free_reduce, invert_word


@dataclass(frozen=True)
class WeightFunction:
    """``f(s) = exp(-a|s|)``, a member of the admissible weight class."""

    a: Fraction = Fraction(1)

    def __post_init__(self):
        a = as_fraction(self.a)
        if a <= 0:
            raise ValueError("decay must be positive")
        object.__setattr__(self, "a", a)

    def __call__(self, s) -> float:
        return math.exp(-float(self.a) * abs(float(s)))

    def tail(self, S) -> float:
        return weight_tail_bound(self, S)

    def check_class(self, grid: Sequence[float] = tuple(x / 4 for x in range(-80, 81))) -> bool:
        """Spot-check ``f(0)=1``, evenness, range ``(0,1]`` and decay of ``2|s|f(s)``."""
        vals = [self(s) for s in grid]
        ok = self(0) == 1.0 and all(0 < v <= 1 for v in vals)
        ok &= all(self(s) == self(-s) for s in grid)
        return ok and 2 * 1e3 * self(1e3) < 1e-6


def weight_tail_bound(f: WeightFunction, S) -> float:
    """``sup_{|s| >= S} 2|s| f(s)``; the maximum sits at ``1/a`` unless ``S`` is beyond it."""
    S = as_fraction(S)
    if S < 0:
        raise ValueError("S must be >= 0")
    a = f.a
    if a * S <= 1:
        return 2.0 / (float(a) * math.e)
    return 2.0 * float(S) * math.exp(-float(a * S))


def tail_majorant(c, W, f: WeightFunction) -> float:
    """``sup_{v >= W} (c + 2(v - W)) exp(-a v)``: what a 2-Lipschitz distance can add past the window."""
    c, W, a = as_fraction(c), as_fraction(W), f.a
    vstar = W + 1 / a - c / 2
    if vstar <= W:
        return float(c) * math.exp(-float(a * W))
    return 2.0 / float(a) * math.exp(-float(a * vstar))


class Interval(NamedTuple):
    lo: float
    hi: float
    witness: Fraction | None = None  # time attaining lo


class QuotientInterval(NamedTuple):
    lo: float
    hi: float
    g: tuple[int, ...]
    n_candidates: int
    unique: bool


# ---------------------------------------------------------------------------
# pointwise distances
# ---------------------------------------------------------------------------

def point_distance(patch: CoverPatch, oracle: DistanceOracle, p: GraphPoint, q: GraphPoint) -> Fraction:
    """Exact distance between two points of the full cover."""
    best = None
    for a, ea in patch._ends(p):
        for b, eb in patch._ends(q):
            d = ea + eb + oracle(a, b)
            if best is None or d < best:
                best = d
    if p.side is not None and q.side is not None and patch._edge_id(p) == patch._edge_id(q):
        L = patch.base.side_length(p.side)
        tp = p.offset if (p.vertex, p.side) == patch._edge_id(p) else L - p.offset
        tq = q.offset if (q.vertex, q.side) == patch._edge_id(q) else L - q.offset
        best = min(best, abs(tp - tq))
    return best


class _Segment(NamedTuple):
    tail: int     # vertex key at the cell start of the edge
    head: int
    side: int
    alpha: Fraction  # position along the edge = alpha + u


def _segment(walker: PathWalker, pos: Fraction, u: Fraction) -> _Segment:
    param = pos + u
    i = math.floor(param)
    s = walker.path.symbol(i)
    return _Segment(walker.vertex(i), walker.vertex(i + 1), s, pos - i)


def _pieces(patch, oracle, sp: _Segment, sq: _Segment, u0, u1):
    """Affine pieces ``(alpha, beta)`` whose minimum is ``d(p(u), q(u))`` on ``[u0, u1]``.

    Returns a list of sub-cells, each with its own piece list, so that the
    same-edge direct distance stays affine.
    """
    ends_p = ((sp.tail, sp.alpha, 1), (sp.head, 1 - sp.alpha, -1))
    ends_q = ((sq.tail, sq.alpha, 1), (sq.head, 1 - sq.alpha, -1))
    base = []
    for a, aa, ba in ends_p:
        for b, ab, bb in ends_q:
            base.append((aa + ab + oracle(a, b), ba + bb))
    eid_p = min((sp.tail, sp.side), (sp.head, sp.side ^ 1))
    eid_q = min((sq.tail, sq.side), (sq.head, sq.side ^ 1))
    if eid_p != eid_q:
        return [(u0, u1, base)]
    # coordinates along the canonical direction of the shared edge
    cp = (sp.alpha, 1) if (sp.tail, sp.side) == eid_p else (1 - sp.alpha, -1)
    cq = (sq.alpha, 1) if (sq.tail, sq.side) == eid_q else (1 - sq.alpha, -1)
    c0, c1 = cp[0] - cq[0], cp[1] - cq[1]  # x_p - x_q = c0 + c1 u
    cells = []
    cuts = [u0, u1]
    if c1 != 0:
        uc = Fraction(-c0, 1) / c1
        if u0 < uc < u1:
            cuts = [u0, uc, u1]
    for v0, v1 in zip(cuts, cuts[1:]):
        mid = (v0 + v1) / 2
        sign = 1 if c0 + c1 * mid >= 0 else -1
        cells.append((v0, v1, base + [(sign * c0, sign * c1)]))
    return cells


def _envelope(pieces, u0, u1):
    """Lower envelope of affine ``pieces`` on ``[u0, u1]`` as ``(v0, v1, alpha, beta)`` runs."""
    cuts = {u0, u1}
    for (a1, b1), (a2, b2) in itertools.combinations(pieces, 2):
        if b1 != b2:
            u = Fraction(a2 - a1) / (b1 - b2)
            if u0 < u < u1:
                cuts.add(u)
    cuts = sorted(cuts)
    out = []
    for v0, v1 in zip(cuts, cuts[1:]):
        mid = (v0 + v1) / 2
        a, b = min(pieces, key=lambda p: p[0] + p[1] * mid)
        if out and out[-1][2:] == (a, b):
            out[-1] = (out[-1][0], v1, a, b)
        else:
            out.append((v0, v1, a, b))
    return out


def _weighted_max(alpha, beta, v0, v1, T, f: WeightFunction):
    """Max of ``(alpha + beta u) * F(u)`` on ``[v0, v1]`` (no breakpoint of ``F`` inside)."""
    a = f.a
    cands = [v0, v1]
    if beta != 0:
        if v0 >= T:
            cands.append(1 / a - Fraction(alpha) / beta)
        elif v1 <= 0:
            cands.append(-1 / a - Fraction(alpha) / beta)
    best, arg = -1.0, v0
    for u in cands:
        if not v0 <= u <= v1:
            continue
        m = alpha + beta * u
        if u > T:
            w = math.exp(-float(a * (u - T)))
        elif u < 0:
            w = math.exp(float(a * u))
        else:
            w = 1.0
        val = float(m) * w
        if val > best:
            best, arg = val, u
    return best, arg


def _dyn_interval(patch, oracle, gamma, gamma2, T, W, f: WeightFunction) -> Interval:
    T, W = as_fraction(T), as_fraction(W)
    if T < 0 or W < 0:
        raise ValueError("T and W must be >= 0")
    wp, wq = PathWalker(patch, gamma), PathWalker(patch, gamma2)
    pp, pq = gamma.position, gamma2.position
    lo_u, hi_u = -W, T + W
    cuts = {lo_u, hi_u, Fraction(0), T}
    for pos in (pp, pq):
        frac = pos - math.floor(pos)
        k = math.ceil(lo_u + frac)
        while k - frac <= hi_u:
            cuts.add(k - frac)
            k += 1
    cuts = sorted(c for c in cuts if lo_u <= c <= hi_u)
    best, arg = -1.0, Fraction(0)
    m_lo = m_hi = None
    if len(cuts) == 1:
        cuts = [cuts[0], cuts[0]]
    for u0, u1 in zip(cuts, cuts[1:]):
        mid = (u0 + u1) / 2
        sp = _segment(wp, pp, mid)
        sq = _segment(wq, pq, mid)
        for v0, v1, pieces in _pieces(patch, oracle, sp, sq, u0, u1):
            for e0, e1, a, b in _envelope(pieces, v0, v1):
                val, u = _weighted_max(a, b, e0, e1, T, f)
                if val > best:
                    best, arg = val, u
                if e0 == lo_u and m_lo is None:
                    m_lo = a + b * e0
                if e1 == hi_u:
                    m_hi = a + b * e1
    if m_lo is None:  # degenerate window
        m_lo = m_hi = point_distance(patch, oracle, point_at(patch, gamma, 0, wp),
                                     point_at(patch, gamma2, 0, wq))
        best = max(best, float(m_lo))
    hi = max(best, tail_majorant(m_lo, W, f), tail_majorant(m_hi, W, f))
    return Interval(best, hi, arg)


def same_line(patch: CoverPatch, gamma: GeodesicPath, gamma2: GeodesicPath) -> bool:
    """Whether two eventually periodic paths are the same parametrized line."""
    if not (gamma.is_periodic and gamma2.is_periodic):
        return gamma == gamma2
    if gamma.offset != gamma2.offset:
        return False
    wp, wq = PathWalker(patch, gamma), PathWalker(patch, gamma2)
    i, j = math.floor(gamma.position), math.floor(gamma2.position)
    if wp.vertex(i) != wq.vertex(j):
        return False
    # agreement past both pre-periods for one common period decides the whole sequence
    fwd = max(len(gamma.forward.head) - i, len(gamma2.forward.head) - j, 0) \
        + math.lcm(len(gamma.forward.period), len(gamma2.forward.period))
    bwd = max(len(gamma.backward.head) + i, len(gamma2.backward.head) + j, 0) \
        + math.lcm(len(gamma.backward.period), len(gamma2.backward.period))
    return all(wp.path.symbol(i + k) == wq.path.symbol(j + k) for k in range(-bwd - 1, fwd + 1))


def d_f(patch: CoverPatch, gamma: GeodesicPath, gamma2: GeodesicPath, W=6,
        f: WeightFunction | None = None, oracle: DistanceOracle | None = None) -> Interval:
    """Interval for ``sup_s d(gamma(s), gamma2(s)) f(s)``; exact on ``[-W, W]``."""
    f = f or WeightFunction(1)
    oracle = oracle or DistanceOracle(patch)
    if same_line(patch, gamma, gamma2):
        return Interval(0.0, 0.0, Fraction(0))
    return _dyn_interval(patch, oracle, gamma, gamma2, 0, W, f)


def d_f_dyn(patch: CoverPatch, gamma: GeodesicPath, gamma2: GeodesicPath, T, W=6,
            f: WeightFunction | None = None, oracle: DistanceOracle | None = None) -> Interval:
    """Interval for ``sup_{t in [0,T]} D_f(Phi_t gamma, Phi_t gamma2)``."""
    f = f or WeightFunction(1)
    oracle = oracle or DistanceOracle(patch)
    if same_line(patch, gamma, gamma2):
        return Interval(0.0, 0.0, Fraction(0))
    return _dyn_interval(patch, oracle, gamma, gamma2, T, W, f)


def quotient_d_f(patch: CoverPatch, gamma: GeodesicPath, gamma2: GeodesicPath, T=0, W=6,
                 f: WeightFunction | None = None, oracle: DistanceOracle | None = None,
                 max_candidates: int = 10_000) -> QuotientInterval:
    """``inf_g D_f^T(g gamma, gamma2)`` over deck transformations ``g``.

    Only ``g`` with ``d(g gamma(0), gamma2(0)) <= hi`` can compete, since that
    distance lower-bounds ``D_f``.
    """
    f = f or WeightFunction(1)
    oracle = oracle or DistanceOracle(patch)
    wp, wq = PathWalker(patch, gamma), PathWalker(patch, gamma2)
    p0 = point_at(patch, gamma, 0, wp)
    q0 = point_at(patch, gamma2, 0, wq)
    a_key = wp.vertex(math.floor(gamma.position))
    q_key = wq.vertex(math.floor(gamma2.position))
    va, wa = patch.split_key(a_key)
    wa_inv = invert_word(wa)
    results: dict[tuple, Interval] = {}
    seen: set[int] = set()
    best_hi = math.inf
    radius = Fraction(2)
    while True:
        ball = patch.local_ball(q_key, radius)
        for key in sorted(k for k in ball if k % patch.n_base == va and k not in seen):
            seen.add(key)
            g = free_reduce(patch.split_key(key)[1] + wa_inv)
            gp = translate_path(patch, g, gamma)
            d0 = point_distance(patch, oracle, patch.translate(g, p0), q0)
            if d0 > best_hi:
                continue
            if same_line(patch, gp, gamma2):
                iv = Interval(0.0, 0.0, Fraction(0))
            else:
                iv = _dyn_interval(patch, oracle, gp, gamma2, T, W, f)
            results[g] = iv
            best_hi = min(best_hi, iv.hi)
            if len(results) > max_candidates:
                raise BudgetExceeded("too many deck candidates")
        need = Fraction(math.ceil(best_hi * 1000) + 1, 1000) + 2 if best_hi < math.inf else radius + 2
        if radius >= need:
            break
        radius = need
    live = {g: iv for g, iv in results.items() if iv.lo <= best_hi}
    g_best = min(live, key=lambda g: (live[g].lo, len(g), g))
    lo = min(iv.lo for iv in live.values())
    return QuotientInterval(lo, best_hi, g_best, len(live), len(live) == 1)


def bowen_distance(patch: CoverPatch, gamma: GeodesicPath, gamma2: GeodesicPath, n: int, W=4,
                   f: WeightFunction | None = None, oracle: DistanceOracle | None = None,
                   stop_above: float | None = None, order: Sequence[int] | None = None) -> Interval:
    """``max_{i=0..n}`` of the quotient ``D_f`` between ``Phi_i`` images (discrete Bowen metric).

    With ``stop_above`` the scan ends once the running lower bound exceeds it.
    """
    f = f or WeightFunction(1)
    oracle = oracle or DistanceOracle(patch)
    lo = hi = 0.0
    idx = list(order) if order is not None else list(range(n + 1))
    idx += [i for i in range(n + 1) if i not in idx]
    complete = True
    for k, i in enumerate(idx):
        q = quotient_d_f(patch, flow_shift(gamma, i), flow_shift(gamma2, i), 0, W, f, oracle)
        lo, hi = max(lo, q.lo), max(hi, q.hi)
        if stop_above is not None and lo >= stop_above and k + 1 < len(idx):
            complete = False
            break
    return Interval(lo, hi if complete else math.inf, None)


class SeparationReport(NamedTuple):
    passed: bool
    min_distance: float
    worst_pair: tuple | None
    n_words: int
    n_pairs: int


def word_lines(patch: CoverPatch, shift, words) -> list[GeodesicPath]:
    """Lines reading ``word`` on positions ``0..len-1`` from the lift of its tail vertex."""
    out = []
    for w in words:
        fwd, bwd = extend_to_line(shift, w)
        start = patch.base.side_tail(w[0])  # key of (v, e)
        out.append(GeodesicPath.from_words(start, fwd, bwd))
    return out


def separated_set_check(patch: CoverPatch, shift, n: int, threshold=Fraction(1, 3),
                        f: WeightFunction | None = None, W=2, max_pairs: int = 200_000) -> SeparationReport:
    """Check that lines coded by the admissible ``n``-words are pairwise ``> threshold`` apart
    in the quotient Bowen metric ``max_{i=0..n}``.

    ``min_distance`` is a certified lower bound on the smallest pairwise distance.
    """
    from .symbolic import enumerate_words
    f = f or WeightFunction(1)
    words = list(enumerate_words(shift, 0, n - 1))
    lines = word_lines(patch, shift, words)
    n_pairs = len(words) * (len(words) - 1) // 2
    if n_pairs > max_pairs:
        raise BudgetExceeded(f"{n_pairs} pairs exceed the budget")
    oracle = DistanceOracle(patch)
    best = math.inf
    worst = None
    for i, j in itertools.combinations(range(len(words)), 2):
        first = next(k for k in range(n) if words[i][k] != words[j][k])
        order = [first] + [k for k in range(first + 1, n + 1)]
        iv = bowen_distance(patch, lines[i], lines[j], n, W, f, oracle,
                            stop_above=best if best < math.inf else None, order=order)
        if iv.lo < best:
            best = iv.lo
            worst = (shift.format(words[i]), shift.format(words[j]))
    if not words:
        return SeparationReport(True, math.inf, None, 0, 0)
    if len(words) == 1:
        best = math.inf
    return SeparationReport(best > float(threshold), best, worst, len(words), n_pairs)


# ---------------------------------------------------------------------------
# return schedules and K_tau
# ---------------------------------------------------------------------------

def orbit_distances(patch: CoverPatch) -> list[Fraction]:
    """``d(v, Gamma x)`` for every base vertex ``v`` (distances in the quotient graph)."""
    import heapq
    base = patch.base
    best = {patch.basepoint_vertex: Fraction(0)}
    heap = [(Fraction(0), patch.basepoint_vertex)]
    done = set()
    while heap:
        d, v = heapq.heappop(heap)
        if v in done:
            continue
        done.add(v)
        for s in base.sides_from[v]:
            h = base.side_head(s)
            nd = d + base.side_length(s)
            if nd < best.get(h, nd + 1):
                best[h] = nd
                heapq.heappush(heap, (nd, h))
    return [best[v] for v in range(base.n_vertices)]


def return_intervals(patch: CoverPatch, sides: Sequence[int], tau, start_vertex: int | None = None):
    """Closed time intervals in ``[0, len(sides)]`` where the side path is within ``tau`` of the orbit."""
    tau = as_fraction(tau)
    dist = orbit_distances(patch)
    base = patch.base
    v = patch.basepoint_vertex if start_vertex is None else start_vertex
    out: list[list[Fraction]] = []
    t = Fraction(0)

    def add(a, b):
        if out and a <= out[-1][1]:
            out[-1][1] = max(out[-1][1], b)
        else:
            out.append([a, b])

    for s in sides:
        if base.side_tail(s) != v:
            raise ValueError("side word is not a path")
        h = base.side_head(s)
        L = base.side_length(s)
        if dist[v] <= tau:
            add(t, t + min(L, tau - dist[v]))
        if dist[h] <= tau:
            add(t + L - min(L, tau - dist[h]), t + L)
        t += L
        v = h
    return [tuple(iv) for iv in out]


class ScheduleReport(NamedTuple):
    returns: list
    grid_pass: bool | None
    grid_checked: int
    window_pass: bool | None
    windows_checked: int
    thetas: list


def limit_schedule(patch: CoverPatch, z, tau, horizon, grid_step=None,
                   c=None, eps=None, n: int | None = None) -> ScheduleReport:
    """Return times of the ray ``x -> z`` near the orbit, with the two schedule tests.

    The grid test asks for a return in every ``[i*s, (i+1)*s]`` inside the
    horizon (``s = grid_step``, default ``tau``).  The window test looks for an
    increasing ``theta`` with ``|theta_i/i - c| <= eps`` for ``i >= n`` and a
    return in every ``[theta_i, theta_{i+1}]``.
    """
    from .hyperbolic import BoundaryPoint
    horizon = as_fraction(horizon)
    tau = as_fraction(tau)
    if not isinstance(z, BoundaryPoint):
        raise TypeError("z must be a BoundaryPoint")
    depth = math.ceil(horizon)
    sides = [z.side(patch.base, k) for k in range(depth)]
    returns = [iv for iv in return_intervals(patch, sides, tau) if iv[0] <= horizon]
    returns = [(a, min(b, horizon)) for a, b in returns]

    def next_return(t):
        for a, b in returns:
            if b >= t:
                return max(a, t)
        return None

    step = tau if grid_step is None else as_fraction(grid_step)
    grid_pass, checked = None, 0
    if step > 0:
        grid_pass = True
        i = 0
        while (i + 1) * step <= horizon:
            r = next_return(i * step)
            if r is None or r > (i + 1) * step:
                grid_pass = False
                break
            i += 1
            checked = i
    window_pass, wchecked, thetas = None, 0, []
    if c is not None:
        c, eps = as_fraction(c), as_fraction(eps)
        n = 1 if n is None else max(1, int(n))
        if (c + eps) * (n + 1) > horizon:
            raise UncertifiedError("horizon insufficient to decide the n-th window")
        theta = Fraction(0) if n > 1 else (c - eps)
        thetas = [theta]
        window_pass = True
        i = 1
        while True:
            hi_next = (c + eps) * (i + 1) if i + 1 >= n else None
            if hi_next is not None and hi_next > horizon:
                break
            r = next_return(theta)
            lo_next = (c - eps) * (i + 1) if i + 1 >= n else theta
            if r is None:
                window_pass = False
                break
            nxt = max(r, lo_next, theta)
            if hi_next is not None and nxt > hi_next:
                window_pass = False
                break
            theta = nxt
            thetas.append(theta)
            i += 1
            wchecked = i
            if hi_next is None and theta > horizon:
                break
    return ScheduleReport(returns, grid_pass, checked, window_pass, wchecked, thetas)


def k_tau_check(patch: CoverPatch, gamma: GeodesicPath, tau, horizon=None) -> bool:
    """``d(gamma(n), Gamma x) <= tau`` for all integers ``n`` (one period suffices)."""
    if not gamma.is_periodic:
        raise GeoflowError("K_tau membership needs a periodic path")
    fp, bp = gamma.periods()
    forward_pre = len(gamma.forward.head)
    backward_pre = len(gamma.backward.head)
    span = range(-(backward_pre + bp) - abs(gamma.shift) - 1, forward_pre + fp + abs(gamma.shift) + 1)
    if horizon is not None:
        span = range(-int(horizon), int(horizon) + 1)
    tau = as_fraction(tau)
    dist = orbit_distances(patch)
    walker = PathWalker(patch, gamma)
    for k in span:
        p = point_at(patch, gamma, k, walker)
        d = min(dist[key % patch.n_base] + e for key, e in patch._ends(p))
        if d > tau:
            return False
    return True
