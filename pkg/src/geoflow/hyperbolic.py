"""Gromov products, four-point hyperbolicity, boundary words, shadows and hulls.

Boundary points are eventually periodic side-label words read from the
basepoint.  On tree-coded covers (a rose whose loops carry distinct free
generators) products, visual balls and hulls are decided combinatorially on
prefixes; elsewhere the answers come from exact distances on the patch.
"""
from __future__ import annotations

import math
import re
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .exceptions import GeoflowError, UncertifiedError
from .flow import point_distance
from .paths import DistanceOracle, EdgeWord, GeodesicPath, PathWalker, point_at
from .report import EntropyReport, fit_slope, step_slopes
from .space import CoverPatch, GraphPoint, MetricGraph, as_fraction

_LABEL = re.compile(r"[A-Za-z][0-9]*")


def _labels(text) -> tuple[str, ...]:
    if isinstance(text, (tuple, list)):
        return tuple(text)
    tokens = _LABEL.findall(text)
    if "".join(tokens) != text:
        raise ValueError(f"cannot parse edge word {text!r}")
    return tuple(tokens)


def _inv(label: str) -> str:
    return label[:1].swapcase() + label[1:]


def _is_reduced(word: Sequence[str]) -> bool:
    return all(word[i + 1] != _inv(word[i]) for i in range(len(word) - 1))


def gromov_product(patch: CoverPatch, x: GraphPoint, y: GraphPoint, z: GraphPoint) -> Fraction:
    """``(y, z)_x = (d(x,y) + d(x,z) - d(y,z)) / 2``, exact."""
    return (patch.distance(x, y) + patch.distance(x, z) - patch.distance(y, z)) / 2


# ---------------------------------------------------------------------------
# four-point condition
# ---------------------------------------------------------------------------

class HyperbolicityReport(NamedTuple):
    delta: Fraction
    radius: Fraction
    n_points: int
    n_quadruples: int
    witness: tuple | None
    stable: bool | None
    sampled: bool


def _net_points(patch: CoverPatch, R: Fraction, midpoints: bool) -> list[GraphPoint]:
    Rs = R * patch.scale
    pts = [GraphPoint(k) for k, d in zip(patch.keys, patch.dist.tolist()) if d <= Rs]
    if midpoints:
        seen = set()
        for p in list(pts):
            for s, k2, _ in patch.neighbors(p.vertex):
                half = patch.base.side_length(s) / 2
                m = patch.point_on(p.vertex, s, half)
                eid = patch._edge_id(m)
                if eid in seen or k2 not in patch.index:
                    continue
                seen.add(eid)
                if patch.dist_to_base(m) <= R:
                    pts.append(m)
    return pts


def _vertex_matrix(patch: CoverPatch, keys: list[int], cutoff: Fraction) -> np.ndarray:
    """Scaled distances between ``keys`` in the full cover (exact up to ``cutoff``)."""
    n = len(keys)
    limit = math.floor(cutoff * patch.scale)
    out = np.full((n, n), -1, dtype=np.int64)
    far = max((int(patch.dist[patch.index[k]]) for k in keys), default=0)
    # a geodesic of length <= limit between the keys stays within far + limit/2 of x
    reach = far + (limit + 1) // 2
    if patch.radius * patch.scale >= reach:
        region = [i for i, d in enumerate(patch.dist.tolist()) if d <= reach]
        local = {patch.keys[i]: j for j, i in enumerate(region)}
        best: dict[tuple[int, int], int] = {}
        for k, i in local.items():
            for _, k2, ln in patch.neighbors(k):
                j = local.get(k2)
                if j is not None and j != i:
                    if ln < best.get((i, j), ln + 1):
                        best[(i, j)] = ln
        rows, cols = zip(*best) if best else ((), ())
        A = csr_matrix((list(best.values()), (rows, cols)), shape=(len(local), len(local)))
        idx = [local[k] for k in keys]
        D = dijkstra(A, directed=True, indices=idx, limit=limit + 0.5)
        sub = D[:, idx]
        ok = np.isfinite(sub)
        out[ok] = np.rint(sub[ok]).astype(np.int64)
    else:
        pos = {k: i for i, k in enumerate(keys)}
        for i, k in enumerate(keys):
            for k2, d in patch.local_ball(k, cutoff).items():
                j = pos.get(k2)
                if j is not None:
                    out[i, j] = d
    if (out < 0).any():
        raise UncertifiedError("net distances beyond the search cutoff")
    return out


def _point_matrix(patch: CoverPatch, pts: list[GraphPoint]) -> tuple[np.ndarray, int]:
    """Distances between net points scaled by ``2 * patch.scale`` (midpoints included)."""
    ends = [patch._ends(p) for p in pts]
    keys = sorted({k for e in ends for k, _ in e})
    pos = {k: i for i, k in enumerate(keys)}
    far = max(int(patch.dist[patch.index[k]]) for k in keys)
    V = _vertex_matrix(patch, keys, Fraction(2 * far, patch.scale))
    s2 = 2 * patch.scale
    n = len(pts)
    D = np.full((n, n), np.iinfo(np.int64).max // 4, dtype=np.int64)
    for a, ea in enumerate(ends):
        for ka, oa in ea:
            ra = V[pos[ka]]
            for b, eb in enumerate(ends):
                for kb, ob in eb:
                    val = int(ra[pos[kb]]) * 2 + int(oa * s2) + int(ob * s2)
                    if val < D[a, b]:
                        D[a, b] = val
    eids = [patch._edge_id(p) if p.side is not None else None for p in pts]
    for a in range(n):
        D[a, a] = 0
        if eids[a] is None:
            continue
        for b in range(n):
            if b != a and eids[b] == eids[a]:
                D[a, b] = min(D[a, b], abs(int((pts[a].offset - pts[b].offset) * s2)))
    return D, s2


def _max_defect(D: np.ndarray, block: int = 48) -> tuple[int, tuple]:
    """Max over ``(x, y, z, w)`` of ``min((x,y)_w, (y,z)_w) - (x,z)_w`` in doubled units."""
    n = len(D)
    best, arg = 0, None
    for w in range(n):
        G = D[w][:, None] + D[w][None, :] - D  # twice the products based at w
        for x0 in range(0, n, block):
            Gx = G[x0:x0 + block]
            M = np.minimum(Gx[:, :, None], G[None, :, :])  # [x, y, z]
            best_y = M.max(axis=1)
            defect = best_y - Gx
            m = int(defect.max())
            if m > best:
                xi, zi = np.unravel_index(int(defect.argmax()), defect.shape)
                yi = int(M[xi, :, zi].argmax())
                best, arg = m, (x0 + int(xi), yi, int(zi), w)
    return best, arg


def estimate_delta(patch: CoverPatch, R=None, net: str = "vertices", max_points: int = 260,
                   seed: int = 0, check_stable: bool = True) -> HyperbolicityReport:
    """Exact four-point defect over the net points of ``B(x, R)``.

    ``net="midpoints"`` adds edge midpoints; on graphs whose vertex distances
    are tree-like (e.g. doubled edges) only those reveal the positive defect.
    Above ``max_points`` a seeded sample is scanned and the report is flagged.
    """
    R = patch.radius if R is None else as_fraction(R)
    if R < 0 or R > patch.radius:
        raise UncertifiedError(f"region radius {R} beyond patch radius {patch.radius}")
    if net not in ("vertices", "midpoints"):
        raise ValueError("net must be 'vertices' or 'midpoints'")
    pts = _net_points(patch, R, net == "midpoints")
    sampled = False
    if len(pts) > max_points:
        rng = np.random.default_rng(seed)
        pick = sorted(rng.choice(len(pts), size=max_points, replace=False).tolist())
        pts = [pts[i] for i in pick]
        sampled = True
    D, s2 = _point_matrix(patch, pts)
    m, arg = _max_defect(D)
    delta = Fraction(m, 2 * s2)
    witness = tuple(pts[i] for i in arg) if arg is not None else None
    stable = None
    if check_stable and R >= 2 and not sampled:
        inner = estimate_delta(patch, R - 2, net, max_points, seed, check_stable=False)
        stable = inner.delta == delta
    n = len(pts)
    return HyperbolicityReport(delta, R, n, n ** 4, witness, stable, sampled)


# ---------------------------------------------------------------------------
# boundary words
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundaryPoint:
    """Ray ``head + period^inf`` of side labels from the basepoint; no period means windowed."""

    head: tuple[str, ...] = ()
    period: tuple[str, ...] = ()

    def __post_init__(self):
        head, period = _labels(self.head), _labels(self.period)
        object.__setattr__(self, "head", head)
        object.__setattr__(self, "period", period)
        if not head and not period:
            raise ValueError("boundary point needs a head or a period")
        word = head + period + period[:1]
        if not _is_reduced(word[: len(head) + 2 * len(period)] if period else head):
            raise ValueError("boundary word is not reduced")
        if period and _inv(period[-1]) == period[0]:
            raise ValueError("period is not cyclically reduced")

    @classmethod
    def parse(cls, data) -> "BoundaryPoint":
        if isinstance(data, BoundaryPoint):
            return data
        if isinstance(data, str):
            # "head(period)", e.g. "a1(a2A1)"; no parentheses means a finite window
            head, _, rest = data.partition("(")
            return cls(head, rest.rstrip(")"))
        return cls(data.get("head", ""), data.get("period", ""))

    def to_dict(self) -> dict:
        return {"head": "".join(self.head), "period": "".join(self.period)}

    @property
    def windowed(self) -> bool:
        return not self.period

    def label(self, k: int) -> str:
        if k < len(self.head):
            return self.head[k]
        if not self.period:
            raise UncertifiedError(f"boundary point known only to depth {len(self.head)}")
        return self.period[(k - len(self.head)) % len(self.period)]

    def side(self, base: MetricGraph, k: int) -> int:
        return base.side_by_label(self.label(k))

    def prefix(self, n: int) -> tuple[str, ...]:
        return tuple(self.label(k) for k in range(n))

    def decision_depth(self, other: "BoundaryPoint") -> int | None:
        """Depth past which agreement implies equality (``None`` if either is windowed)."""
        if self.windowed or other.windowed:
            return None
        return max(len(self.head), len(other.head)) + math.lcm(len(self.period), len(other.period))

    def as_path(self, base: MetricGraph, start: int = 0) -> GeodesicPath:
        """Forward-only path (backward part windowed and empty)."""
        fwd = EdgeWord(tuple(base.side_by_label(s) for s in self.head),
                       tuple(base.side_by_label(s) for s in self.period))
        return GeodesicPath.from_words(start, fwd, EdgeWord())


@dataclass(frozen=True)
class CylinderSet:
    """Boundary points extending any listed prefix; ``()`` is the whole boundary."""

    prefixes: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        words = sorted({_labels(p) for p in self.prefixes}, key=lambda w: (len(w), w))
        for w in words:
            if not _is_reduced(w):
                raise ValueError(f"prefix {''.join(w)!r} is not reduced")
        kept: list[tuple[str, ...]] = []
        for w in words:
            if not any(w[:len(q)] == q for q in kept):
                kept.append(w)
        object.__setattr__(self, "prefixes", tuple(sorted(kept)))

    @classmethod
    def parse(cls, data) -> "CylinderSet":
        if isinstance(data, CylinderSet):
            return data
        if isinstance(data, dict):
            data = data.get("prefixes", [])
        elif isinstance(data, str):
            data = [data]
        return cls(tuple(data))

    @classmethod
    def full(cls) -> "CylinderSet":
        return cls(((),))

    def to_dict(self) -> dict:
        return {"prefixes": ["".join(p) for p in self.prefixes]}

    @property
    def is_full(self) -> bool:
        return () in self.prefixes

    @property
    def max_length(self) -> int:
        return max((len(p) for p in self.prefixes), default=0)

    def meets_cylinder(self, word: Sequence[str]) -> bool:
        """Whether some point extends ``word`` and lies in the set."""
        word = tuple(word)
        return any(word[:len(q)] == q or q[:len(word)] == word for q in self.prefixes)

    def meets_complement(self, word: Sequence[str]) -> bool:
        """Whether some point outside ``cyl(word)`` lies in the set (branching >= 2)."""
        word = tuple(word)
        return any(q[:len(word)] != word for q in self.prefixes)

    def contains(self, z: BoundaryPoint) -> bool:
        return any(z.prefix(len(q)) == q for q in self.prefixes)


def ray_point(patch: CoverPatch, z: BoundaryPoint, t) -> GraphPoint:
    """``xi_{x,z}(t)``; the ray is checked to be geodesic up to ``ceil(t)``."""
    t = as_fraction(t)
    if t < 0:
        raise ValueError("t must be >= 0")
    if t > patch.radius:
        raise UncertifiedError(f"time {t} beyond patch radius {patch.radius}")
    base = patch.base
    if not base.is_unit:
        raise GeoflowError("boundary rays need unit edge lengths")
    key = patch.key(patch.basepoint_vertex)
    k = math.floor(t)
    for i in range(math.ceil(t)):
        s = z.side(base, i)
        if base.side_tail(s) != key % patch.n_base:
            raise GeoflowError("boundary word is not an edge path")
        key2 = patch.head_key(key, s)
        d = patch.dist[patch.index[key2]] if key2 in patch.index else None
        if d is None or d != (i + 1) * patch.scale:
            raise GeoflowError("boundary word does not encode a geodesic ray")
        if i == k:
            return patch.point_on(key, s, t - k)
        key = key2
    return GraphPoint(key)


# ---------------------------------------------------------------------------
# tree-coded covers
# ---------------------------------------------------------------------------

def _tree_core(patch: CoverPatch):
    """``(kept sides, symbol -> label)`` when dropping non-geodesic loops leaves a free tree."""
    base = patch.base
    if base.n_vertices != 1 or not base.is_unit or patch.group.rank < 2:
        return None
    root = patch.key(0)
    kept = []
    to_label: dict[int, str] = {}
    for s in range(base.n_sides):
        if patch.head_key(root, s) == root:
            continue  # loop lifting to a loop: never on a geodesic
        w = patch.voltages[s]
        if len(w) != 1 or w[0] in to_label:
            return None
        to_label[w[0]] = base.side_label(s)
        kept.append(s)
    if set(to_label) != {i for r in range(1, patch.group.rank + 1) for i in (r, -r)}:
        return None
    return frozenset(kept), to_label


def is_tree_coded(patch: CoverPatch) -> bool:
    return _tree_core(patch) is not None


def _vertex_labels(patch: CoverPatch, key: int, to_label) -> tuple[str, ...]:
    _, word = patch.split_key(key)
    return tuple(to_label[s] for s in word)


def _common_prefix(z: BoundaryPoint, w: BoundaryPoint, depth: int) -> int | None:
    stop = z.decision_depth(w)
    limit = depth if stop is None else max(depth, stop)
    for k in range(limit):
        try:
            a, b = z.label(k), w.label(k)
        except UncertifiedError:
            raise UncertifiedError("points indistinguishable within the known depth") from None
        if a != b:
            return k
    if stop is not None and limit >= stop:
        return None
    raise UncertifiedError(f"points agree to depth {depth}")


class ProductValue(NamedTuple):
    value: float
    lo: float
    hi: float
    exact: bool


def boundary_gromov_product(z: BoundaryPoint, w: BoundaryPoint, depth: int = 64,
                            patch: CoverPatch | None = None, delta=None) -> ProductValue:
    """``(z, w)_x``: common prefix length on trees; sampled otherwise.

    The sampled route reports ``min_t (xi(t), xi'(t))_x`` over integer
    ``t <= depth`` with an error bar of ``2 delta``.
    """
    if patch is None or is_tree_coded(patch):
        k = _common_prefix(z, w, depth)
        if k is None:
            return ProductValue(math.inf, math.inf, math.inf, True)
        return ProductValue(float(k), float(k), float(k), True)
    if z == w:
        return ProductValue(math.inf, math.inf, math.inf, True)
    depth = min(depth, math.floor(patch.radius))
    oracle = DistanceOracle(patch)
    best = math.inf
    for t in range(1, depth + 1):
        p, q = ray_point(patch, z, t), ray_point(patch, w, t)
        val = Fraction(2 * t) - oracle(p.vertex, q.vertex)
        best = min(best, float(val) / 2)
    if delta is None:
        delta = estimate_delta(patch, min(patch.radius, 3), net="midpoints", check_stable=False).delta
    err = 2 * float(delta)
    return ProductValue(best, best - err, best + err, err == 0)


def visual_ball_contains(z: BoundaryPoint, rho, w: BoundaryPoint, depth: int = 64,
                         patch: CoverPatch | None = None) -> bool:
    """``(z, w)_x > log(1/rho)``."""
    rho = float(rho)
    if rho <= 0:
        raise ValueError("rho must be positive")
    val = boundary_gromov_product(z, w, depth, patch)
    return val.value > math.log(1 / rho)


def _ray_keys(patch: CoverPatch, z: BoundaryPoint, T: int) -> list[int]:
    keys = [patch.key(patch.basepoint_vertex)]
    for i in range(T):
        keys.append(patch.head_key(keys[-1], z.side(patch.base, i)))
    return keys


def _ball_around(patch: CoverPatch, y: GraphPoint, r: Fraction) -> dict[int, Fraction]:
    """Distances from ``y`` to every vertex within ``r``."""
    out: dict[int, Fraction] = {}
    for k, e in patch._ends(y):
        if e > r:
            continue
        for k2, d in patch.local_ball(k, r - e).items():
            val = e + Fraction(d, patch.scale)
            if val < out.get(k2, val + 1):
                out[k2] = val
    return out


def shadow_contains(patch: CoverPatch, y: GraphPoint, r, z: BoundaryPoint, horizon=None) -> bool:
    """Whether every geodesic from ``x`` towards ``z`` meets the open ball ``B(y, r)``.

    Geodesics are enumerated as all shortest paths from ``x`` to ``xi(T)`` with
    ``T`` past ``d(x, y) + r``; on trees this is the single ray, so the answer is exact.
    """
    r = as_fraction(r)
    if r <= 0:
        raise ValueError("r must be positive")
    dy = patch.dist_to_base(y)
    T = math.ceil(dy + r) + 1 if horizon is None else int(horizon)
    if T > patch.radius:
        raise UncertifiedError("shadow test needs a larger patch")
    ray_point(patch, z, T)  # validates the encoding
    target = _ray_keys(patch, z, T)[-1]
    blocked = {k for k, d in _ball_around(patch, y, r).items() if d < r}
    y_edge = patch._edge_id(y) if y.side is not None else None
    root = patch.key(patch.basepoint_vertex)
    if root in blocked:
        return True
    dT = T * patch.scale
    back = patch.local_ball(target, T)
    dist = patch.dist
    index = patch.index
    todo = deque([root])
    seen = {root}
    while todo:
        k = todo.popleft()
        if k == target:
            return False
        dk = int(dist[index[k]])
        for s, k2, ln in patch.neighbors(k):
            if k2 in seen or k2 in blocked or k2 not in index:
                continue
            # stay on the shortest-path DAG from x to the target
            if int(dist[index[k2]]) != dk + ln or dk + ln + back.get(k2, dT + 1) != dT:
                continue
            if y_edge is not None and min((k, s), (k2, s ^ 1)) == y_edge:
                continue
            seen.add(k2)
            todo.append(k2)
    return True


# ---------------------------------------------------------------------------
# quasi-convex hull
# ---------------------------------------------------------------------------

def _tree_hull(patch: CoverPatch, C: CylinderSet, p: GraphPoint, core) -> bool:
    kept, to_label = core
    if p.side is not None and p.side not in kept:
        return False
    if p.side is None:
        w = _vertex_labels(patch, p.vertex, to_label)
        hits = 0
        for s in kept:
            lab = patch.base.side_label(s)
            if w and lab == _inv(w[-1]):
                hit = C.meets_complement(w)
            else:
                hit = C.meets_cylinder(w + (lab,))
            hits += hit
            if hits >= 2:
                return True
        return False
    wa = _vertex_labels(patch, p.vertex, to_label)
    wb = _vertex_labels(patch, patch.head_key(p.vertex, p.side), to_label)
    child = wa if len(wa) > len(wb) else wb
    return C.meets_cylinder(child) and C.meets_complement(child)


class _GeneralHull:
    """Hull of the full boundary on a finite patch: leaf pruning, then a
    two-sided extension test of length ``rho`` through the point."""

    def __init__(self, patch: CoverPatch, rho: int = 2):
        self.patch = patch
        self.rho = rho
        shell = patch.radius * patch.scale - patch.scale
        deg = {}
        for k in patch.keys:
            deg[k] = sum(1 for _, k2, _ in patch.neighbors(k) if k2 in patch.index and k2 != k)
        alive = set(patch.keys)
        protected = {k for k, d in zip(patch.keys, patch.dist.tolist()) if d > shell}
        todo = deque(k for k in patch.keys if deg[k] <= 1 and k not in protected)
        while todo:
            k = todo.popleft()
            if k not in alive:
                continue
            alive.discard(k)
            for _, k2, _ in patch.neighbors(k):
                if k2 in alive and k2 != k:
                    deg[k2] -= 1
                    if deg[k2] <= 1 and k2 not in protected:
                        todo.append(k2)
        self.alive = alive
        self._cache: dict = {}

    def __call__(self, p: GraphPoint) -> bool:
        patch = self.patch
        if any(k not in self.alive for k, _ in patch._ends(p)):
            return False
        key = (p.vertex, p.side, p.offset)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        rho = Fraction(self.rho) if p.side is None else Fraction(self.rho) + Fraction(1, 2)
        if patch.dist_to_base(p) + rho > patch.radius:
            raise UncertifiedError("hull test needs a larger patch")
        ring = sorted(k for k, d in _ball_around(patch, p, rho).items()
                      if d == rho and k in self.alive)
        hit = False
        for i, a in enumerate(ring):
            ball = patch.local_ball(a, 2 * rho)
            if any(ball.get(b) == 2 * rho * patch.scale for b in ring[i + 1:]):
                hit = True
                break
        self._cache[key] = hit
        return hit


def qc_hull_contains(patch: CoverPatch, C: CylinderSet, p: GraphPoint, _general=None) -> bool:
    """Whether ``p`` lies on a geodesic line with both endpoints in ``C``."""
    if not C.prefixes:
        raise ValueError("hull of a set with fewer than two points")
    core = _tree_core(patch)
    if core is not None:
        return _tree_hull(patch, C, p, core)
    if not C.is_full:
        raise UncertifiedError("hulls of proper subsets need a tree-coded cover")
    hull = _general or _GeneralHull(patch)
    return hull(p)


# ---------------------------------------------------------------------------
# Minkowski dimension and line convexity
# ---------------------------------------------------------------------------

def _prefix_count(C, n: int, rank: int) -> int:
    """Number of reduced words of length ``n`` whose cylinder meets ``C``."""
    if isinstance(C, BoundaryPoint):
        C = [C]
    if isinstance(C, (list, tuple)):
        return len({z.prefix(n) for z in C})
    b = 2 * rank - 1
    total = 0
    long_prefixes = set()
    for q in C.prefixes:
        if len(q) >= n:
            long_prefixes.add(q[:n])
        elif not q:
            total += 2 * rank * b ** (n - 1) if n else 1
        else:
            total += b ** (n - len(q))
    return total + len(long_prefixes)


def minkowski_dimension_estimate(C=None, depths: Sequence[int] = range(1, 11), rank: int = 2) -> EntropyReport:
    """Visual-ball covering counts ``Cov(C, e^-n)`` on ``dT_{2 rank}`` and their slope.

    A visual ball of radius ``e^-n`` is a cylinder of length ``n + 1``.
    """
    if C is None:
        C = CylinderSet.full()
    if isinstance(C, CylinderSet) and not C.prefixes or isinstance(C, (list, tuple)) and not C:
        raise ValueError("empty boundary set")
    rep = EntropyReport("md", config={"rank": rank})
    for n in depths:
        rep.add(n, _prefix_count(C, n + 1, rank))
    ys = rep.log_counts()
    rep.slope, rep.residual = fit_slope(rep.horizons, ys)
    rep.slope_lo, rep.slope_hi = step_slopes(rep.horizons, ys)
    if len(rep.horizons) < 2:
        rep.slope = rep.slope_lo = rep.slope_hi = 0.0
    return rep


class ConvexityReport(NamedTuple):
    defect: Fraction
    witness: tuple | None
    n_pairs: int
    convex: bool
    values: dict


def check_line_convexity(patch: CoverPatch, gamma: GeodesicPath, gamma2: GeodesicPath,
                         grid: Sequence = None) -> ConvexityReport:
    """Worst midpoint defect ``m((t1+t2)/2) - (m(t1)+m(t2))/2`` of ``m(t) = d(gamma(t), gamma2(t))``."""
    if grid is None:
        grid = [Fraction(k, 2) for k in range(-8, 9)]
    grid = sorted({as_fraction(t) for t in grid})
    wp, wq = PathWalker(patch, gamma), PathWalker(patch, gamma2)
    oracle = DistanceOracle(patch, normalize=False)
    cache: dict = {}

    def m(t):
        if t not in cache:
            cache[t] = point_distance(patch, oracle, point_at(patch, gamma, t, wp),
                                      point_at(patch, gamma2, t, wq))
        return cache[t]

    worst, arg, pairs = None, None, 0
    for i, t1 in enumerate(grid):
        for t2 in grid[i + 1:]:
            pairs += 1
            d = m((t1 + t2) / 2) - (m(t1) + m(t2)) / 2
            if worst is None or d > worst:
                worst, arg = d, (t1, (t1 + t2) / 2, t2)
    if worst is None:
        worst = Fraction(0)
    return ConvexityReport(worst, arg, pairs, worst <= 0, dict(sorted(cache.items())))
