"""Parametrized geodesic lines in a cover and the reparametrization flow.

A :class:`GeodesicPath` is an edge path through a cover vertex ``start``; its
side at integer index ``i`` is ``forward[i]`` for ``i >= 0`` and
``backward[-i-1]`` for ``i < 0`` (backward sides are listed in the direction
of travel, nearest first).  The path point at time ``t`` sits at parameter
``t + shift + offset`` along that edge path, with unit-length edges.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import TYPE_CHECKING, Sequence

from .exceptions import GeoflowError, UncertifiedError
if TYPE_CHECKING:
    from .symbolic import ShiftSpace
from .space import CoverPatch, GraphPoint, as_fraction, invert_word


@dataclass(frozen=True)
class EdgeWord:
    """One-sided side sequence ``head + period^inf``; no period means known only on ``head``."""

    head: tuple[int, ...] = ()
    period: tuple[int, ...] = ()

    def __getitem__(self, i: int) -> int:
        if i < len(self.head):
            return self.head[i]
        if not self.period:
            raise UncertifiedError(f"edge word known only to depth {len(self.head)}")
        return self.period[(i - len(self.head)) % len(self.period)]

    @property
    def windowed(self) -> bool:
        return not self.period


@dataclass(frozen=True)
class GeodesicPath:
    start: int
    forward: EdgeWord
    backward: EdgeWord
    shift: int = 0
    offset: Fraction = Fraction(0)

    def __post_init__(self):
        off = as_fraction(self.offset)
        if not 0 <= off < 1:
            raise ValueError("offset must lie in [0, 1)")
        object.__setattr__(self, "offset", off)

    @classmethod
    def periodic(cls, start: int, period: Sequence[int], offset=0) -> "GeodesicPath":
        """Bi-infinite line ``... period period ...`` with ``period[0]`` leaving ``start``."""
        period = tuple(period)
        back = tuple(period[(-k - 1) % len(period)] for k in range(len(period)))
        return cls(start, EdgeWord((), period), EdgeWord((), back), 0, as_fraction(offset))

    @classmethod
    def from_words(cls, start: int, forward: EdgeWord, backward: EdgeWord, offset=0):
        return cls(start, forward, backward, 0, as_fraction(offset))

    def symbol(self, i: int) -> int:
        j = i + self.shift
        return self.forward[j] if j >= 0 else self.backward[-j - 1]

    @property
    def position(self) -> Fraction:
        return self.shift + self.offset

    @property
    def is_periodic(self) -> bool:
        return not (self.forward.windowed or self.backward.windowed)

    def periods(self) -> tuple[int, int] | None:
        """``(forward, backward)`` period lengths when both sides are periodic."""
        if not self.is_periodic:
            return None
        return len(self.forward.period), len(self.backward.period)


def flow_shift(path: GeodesicPath, t) -> GeodesicPath:
    """``Phi_t``: the path reparametrized by ``s -> s + t`` (exact in rationals)."""
    total = path.offset + as_fraction(t)
    k = math.floor(total)
    return replace(path, shift=path.shift + k, offset=total - k)


def translate_path(patch: CoverPatch, g: Sequence[int], path: GeodesicPath) -> GeodesicPath:
    """Deck transformation ``g`` applied to ``path``."""
    return replace(path, start=patch.translate_key(g, path.start))


class PathWalker:
    """Memoized vertex keys ``P(i)`` of a path, relative to its ``start``."""

    def __init__(self, patch: CoverPatch, path: GeodesicPath):
        if not patch.base.is_unit:
            raise GeoflowError("geodesic paths need unit edge lengths")
        self.patch = patch
        self.path = replace(path, shift=0, offset=Fraction(0))
        self._fwd = [path.start]
        self._bwd = [path.start]

    def vertex(self, i: int) -> int:
        """Key of the vertex at (unshifted) parameter ``i``."""
        patch, p = self.patch, self.path
        if i >= 0:
            while len(self._fwd) <= i:
                k = len(self._fwd) - 1
                self._fwd.append(patch.head_key(self._fwd[-1], p.symbol(k)))
            return self._fwd[i]
        while len(self._bwd) <= -i:
            k = -len(self._bwd)
            # symbol(k) runs from P(k) to P(k+1); walk it backwards
            self._bwd.append(patch.head_key(self._bwd[-1], p.symbol(k) ^ 1))
        return self._bwd[-i]


def point_at(patch: CoverPatch, path: GeodesicPath, t, walker: PathWalker | None = None) -> GraphPoint:
    """The point ``path(t)``."""
    walker = walker or PathWalker(patch, path)
    u = path.position + as_fraction(t)
    k = math.floor(u)
    key = walker.vertex(k)
    if u == k:
        return GraphPoint(key)
    return patch.point_on(key, walker.path.symbol(k), u - k)


def anchor(patch: CoverPatch, path: GeodesicPath) -> int:
    """Key of the last vertex at or before ``path(0)``."""
    return PathWalker(patch, path).vertex(math.floor(path.position))


class DistanceOracle:
    """Exact vertex distances in the full (infinite) cover by bidirectional Dijkstra.

    With ``normalize`` the cache is keyed on deck-orbit representatives, so
    ``d(ga, gb)`` reuses ``d(a, b)``.
    """

    def __init__(self, patch: CoverPatch, normalize: bool = True, cache_size: int = 200_000):
        self.patch = patch
        self.normalize = normalize
        self.cache_size = cache_size
        self._cache: dict = {}

    def _key(self, a: int, b: int):
        if a > b:
            a, b = b, a
        if not self.normalize:
            return a, b
        p = self.patch
        va, wa = p.split_key(a)
        if not wa:
            return a, b
        return va, p.translate_key(invert_word(wa), b)

    def scaled(self, a: int, b: int) -> int:
        if a == b:
            return 0
        key = self._key(a, b)
        d = self._cache.get(key)
        if d is None:
            d = self._search(a, b)
            if len(self._cache) >= self.cache_size:
                self._cache.clear()
            self._cache[key] = d
        return d

    def __call__(self, a: int, b: int) -> Fraction:
        return Fraction(self.scaled(a, b), self.patch.scale)

    def _search(self, a: int, b: int) -> int:
        patch = self.patch
        dist = ({a: 0}, {b: 0})
        heaps = ([(0, a)], [(0, b)])
        done = (set(), set())
        best = math.inf
        while heaps[0] and heaps[1]:
            if heaps[0][0][0] + heaps[1][0][0] >= best:
                break
            side = 0 if heaps[0][0][0] <= heaps[1][0][0] else 1
            d, k = heapq.heappop(heaps[side])
            if k in done[side]:
                continue
            done[side].add(k)
            mine, other = dist[side], dist[1 - side]
            for _, k2, ln in patch.neighbors(k):
                nd = d + ln
                if nd < mine.get(k2, math.inf):
                    mine[k2] = nd
                    heapq.heappush(heaps[side], (nd, k2))
                o = other.get(k2)
                if o is not None and nd + o < best:
                    best = nd + o
        if best is math.inf:
            raise GeoflowError("vertices in different components")
        return int(best)


def extend_to_line(shift: "ShiftSpace", word: Sequence[int]) -> tuple[EdgeWord, EdgeWord]:
    """Extend a finite admissible side word to a bi-infinite eventually periodic one.

    The forward tail follows the first successor state until a state repeats;
    the backward tail does the same with predecessors.  Returns the forward
    word (starting with ``word``) and the backward word (sides before ``word``).
    """
    w = shift.window
    word = tuple(word)
    if len(word) < w:
        raise ValueError("word shorter than the shift window")
    index = {s: i for i, s in enumerate(shift.states)}
    preds: list[list[int]] = [[] for _ in shift.states]
    for i, succ in enumerate(shift.successors):
        for j in succ:
            preds[j].append(i)

    def run(state: tuple[int, ...], step, pick) -> tuple[tuple[int, ...], tuple[int, ...]]:
        seen: dict[int, int] = {}
        out: list[int] = []
        i = index.get(state)
        if i is None:
            raise ValueError("word is not admissible")
        while i not in seen:
            seen[i] = len(out)
            j = min(step(i), key=pick)
            out.append(pick(j))
            i = j
        cut = seen[i]
        return tuple(out[:cut]), tuple(out[cut:])

    for k in range(len(word) - w + 1):
        if word[k:k + w] not in index:
            raise ValueError("word is not admissible")
    f_head, f_per = run(word[-w:], lambda i: shift.successors[i], lambda j: shift.states[j][-1])
    b_head, b_per = run(word[:w], lambda i: preds[i], lambda j: shift.states[j][0])
    return EdgeWord(word + f_head, f_per), EdgeWord(b_head, b_per)

