"""Metric graphs, free(-by-finite) group words, derived covers and exact distances.

A periodic space is described by a finite base graph, a group and a voltage
assignment on the directed edge sides.  :func:`expand_cover` explores the
derived cover breadth first around the basepoint ``(v0, e)``.  Every distance
is computed in exact rational arithmetic and every answer is certified against
the explored radius.
"""
from __future__ import annotations

import heapq
import json
import math
import re
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np

from .exceptions import BudgetExceeded, GraphValidationError, UncertifiedError

DEFAULT_MAX_VERTICES = 4_000_000

_GROUP_TOKEN = re.compile(r"([aA])(\d+)")
_SIDE_TOKEN = re.compile(r"[A-Za-z][0-9]*")


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(str(value))
    return Fraction(value)


# ---------------------------------------------------------------------------
# group words
# ---------------------------------------------------------------------------

def free_reduce(symbols: Iterable[int]) -> tuple[int, ...]:
    out: list[int] = []
    for s in symbols:
        if out and out[-1] == -s:
            out.pop()
        else:
            out.append(s)
    return tuple(out)


def invert_word(word: Sequence[int]) -> tuple[int, ...]:
    return tuple(-s for s in reversed(word))


def parse_word(text: str) -> tuple[int, ...]:
    """Parse ``"a1A2"`` into ``(1, -2)``; capital letters are inverses."""
    out = []
    pos = 0
    for m in _GROUP_TOKEN.finditer(text):
        if m.start() != pos:
            break
        i = int(m.group(2))
        if i < 1:
            raise ValueError(f"bad generator index in {text!r}")
        out.append(i if m.group(1) == "a" else -i)
        pos = m.end()
    if pos != len(text):
        raise ValueError(f"cannot parse group word {text!r}")
    return tuple(out)


def format_word(word: Sequence[int]) -> str:
    return "".join(("a" if s > 0 else "A") + str(abs(s)) for s in word)


def _compose(p, q):
    """``p o q`` (apply q first); ``None`` is the identity."""
    if p is None:
        return q
    if q is None:
        return p
    r = tuple(p[i] for i in q)
    return None if r == tuple(range(len(r))) else r


def _invert_perm(p):
    if p is None:
        return None
    inv = [0] * len(p)
    for i, j in enumerate(p):
        inv[j] = i
    return tuple(inv)


@dataclass(frozen=True)
class GroupElement:
    """Reduced word plus a finite permutation part (``None`` = identity)."""

    word: tuple[int, ...] = ()
    perm: tuple[int, ...] | None = None

    def __str__(self):
        s = format_word(self.word) or "e"
        return s if self.perm is None else f"({s}, {list(self.perm)})"


@dataclass(frozen=True)
class GroupSpec:
    """Free group of the given rank, optionally extended by symbol permutations.

    Permutations act on symbol positions ``[a1, A1, a2, A2, ...]``; the
    extension is closed under composition on construction.
    """

    rank: int
    extension: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        if self.rank < 1:
            raise GraphValidationError("group rank must be >= 1")
        if not self.extension:
            return
        n = 2 * self.rank
        gens = []
        for p in self.extension:
            p = tuple(int(i) for i in p)
            if sorted(p) != list(range(n)):
                raise GraphValidationError(f"not a permutation of {n} symbols: {p}")
            for pos in range(n):
                # sigma(s^-1) = sigma(s)^-1
                if p[pos ^ 1] != p[pos] ^ 1:
                    raise GraphValidationError("permutation incompatible with inversion")
            gens.append(p)
        ident = tuple(range(n))
        group = {ident}
        frontier = [ident]
        while frontier:
            nxt = []
            for a in frontier:
                for g in gens:
                    c = tuple(g[i] for i in a)
                    if c not in group:
                        group.add(c)
                        nxt.append(c)
            frontier = nxt
        closed = (ident,) + tuple(sorted(group - {ident}))
        object.__setattr__(self, "extension", closed)

    @staticmethod
    def position(s: int) -> int:
        return 2 * (abs(s) - 1) + (0 if s > 0 else 1)

    @staticmethod
    def symbol(pos: int) -> int:
        i = pos // 2 + 1
        return i if pos % 2 == 0 else -i

    def check_word(self, word: Sequence[int]) -> None:
        for s in word:
            if s == 0 or abs(s) > self.rank:
                raise ValueError(f"symbol outside rank {self.rank}: {s}")

    def apply(self, perm, word: Sequence[int]) -> tuple[int, ...]:
        if perm is None:
            return tuple(word)
        return tuple(self.symbol(perm[self.position(s)]) for s in word)

    @property
    def finite_order(self) -> int:
        return max(1, len(self.extension))

    def element(self, word: str | Sequence[int] = (), perm=None) -> GroupElement:
        if isinstance(word, str):
            word = parse_word(word)
        self.check_word(word)
        if perm is not None:
            perm = tuple(perm)
            if perm == tuple(range(2 * self.rank)):
                perm = None
            elif self.extension and perm not in self.extension:
                raise ValueError("permutation not in the extension")
        return GroupElement(free_reduce(word), perm)


def multiply(g: GroupElement, h: GroupElement, spec: GroupSpec) -> GroupElement:
    """``(w, s)(w', s') = (w s(w'), s s')`` with free reduction."""
    spec.check_word(g.word)
    spec.check_word(h.word)
    word = free_reduce(g.word + spec.apply(g.perm, h.word))
    return GroupElement(word, _compose(g.perm, h.perm))


def inverse(g: GroupElement, spec: GroupSpec) -> GroupElement:
    p = _invert_perm(g.perm)
    return GroupElement(spec.apply(p, invert_word(g.word)), p)


# ---------------------------------------------------------------------------
# base graphs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Edge:
    id: str
    tail: int
    head: int
    length: Fraction
    label: str


def _reverse_label(label: str) -> str:
    return label[:1].swapcase() + label[1:]


@dataclass(frozen=True)
class MetricGraph:
    """Finite connected graph; edge ``i`` has sides ``2i`` (tail->head) and ``2i+1``."""

    n_vertices: int
    edges: tuple[Edge, ...]

    @property
    def n_sides(self) -> int:
        return 2 * len(self.edges)

    @staticmethod
    def reverse(side: int) -> int:
        return side ^ 1

    def side_tail(self, s: int) -> int:
        e = self.edges[s >> 1]
        return e.head if s & 1 else e.tail

    def side_head(self, s: int) -> int:
        e = self.edges[s >> 1]
        return e.tail if s & 1 else e.head

    def side_length(self, s: int) -> Fraction:
        return self.edges[s >> 1].length

    def side_label(self, s: int) -> str:
        label = self.edges[s >> 1].label
        return _reverse_label(label) if s & 1 else label

    @cached_property
    def sides_from(self) -> tuple[tuple[int, ...], ...]:
        out = [[] for _ in range(self.n_vertices)]
        for s in range(self.n_sides):
            out[self.side_tail(s)].append(s)
        return tuple(tuple(x) for x in out)

    @cached_property
    def _label_index(self) -> dict[str, int]:
        index: dict[str, int] = {}
        for s in range(self.n_sides):
            lab = self.side_label(s)
            index[lab] = -1 if lab in index else s
        return index

    def side_by_label(self, label: str) -> int:
        s = self._label_index.get(label)
        if s is None:
            raise KeyError(f"no side labelled {label!r}")
        if s < 0:
            raise KeyError(f"side label {label!r} is ambiguous")
        return s

    def parse_sides(self, text: str) -> tuple[int, ...]:
        tokens = _SIDE_TOKEN.findall(text)
        if "".join(tokens) != text:
            raise ValueError(f"cannot parse edge word {text!r}")
        return tuple(self.side_by_label(t) for t in tokens)

    def format_sides(self, sides: Sequence[int]) -> str:
        return "".join(self.side_label(s) for s in sides)

    @cached_property
    def is_unit(self) -> bool:
        return all(e.length == 1 for e in self.edges)

    @cached_property
    def scale(self) -> int:
        return math.lcm(*(e.length.denominator for e in self.edges)) if self.edges else 1

    def to_dict(self) -> dict:
        return {
            "vertices": self.n_vertices,
            "edges": [
                {"id": e.id, "from": e.tail, "to": e.head,
                 "length": str(e.length), "label": e.label}
                for e in self.edges
            ],
        }


def validate_graph(description: dict) -> MetricGraph:
    """Build a :class:`MetricGraph` from raw data, checking every invariant."""
    try:
        n = int(description["vertices"])
        raw_edges = list(description["edges"])
    except (KeyError, TypeError, ValueError) as exc:
        raise GraphValidationError(f"malformed graph description: {exc}") from None
    if n < 1:
        raise GraphValidationError("graph needs at least one vertex")
    edges = []
    seen = set()
    for i, raw in enumerate(raw_edges):
        eid = str(raw.get("id", i))
        if eid in seen:
            raise GraphValidationError(f"duplicate edge id {eid!r}")
        seen.add(eid)
        tail, head = int(raw["from"]), int(raw["to"])
        if not (0 <= tail < n and 0 <= head < n):
            raise GraphValidationError(f"dangling vertex reference in edge {eid!r}")
        length = as_fraction(raw.get("length", 1))
        if length <= 0:
            raise GraphValidationError(f"nonpositive length on edge {eid!r}")
        edges.append(Edge(eid, tail, head, length, str(raw.get("label", eid))))
    # union-find connectivity
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for e in edges:
        parent[find(e.tail)] = find(e.head)
    if len({find(v) for v in range(n)}) != 1:
        raise GraphValidationError("disconnected graph")
    return MetricGraph(n, tuple(edges))


# ---------------------------------------------------------------------------
# voltages and space descriptions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VoltageAssignment:
    """Free-group word per directed side; the reversed side carries the inverse."""

    sides: tuple[tuple[int, ...], ...]

    @classmethod
    def from_edges(cls, graph: MetricGraph, mapping: dict, spec: GroupSpec | None = None):
        words = []
        for e in graph.edges:
            w = mapping.get(e.id, ())
            if isinstance(w, GroupElement):
                if w.perm is not None:
                    raise GraphValidationError("voltages must lie in the free part")
                w = w.word
            elif isinstance(w, str):
                w = parse_word(w)
            w = free_reduce(w)
            if spec is not None:
                spec.check_word(w)
            words.append(w)
            words.append(invert_word(w))
        unknown = set(mapping) - {e.id for e in graph.edges}
        if unknown:
            raise GraphValidationError(f"voltages for unknown edges: {sorted(unknown)}")
        return cls(tuple(words))

    def __getitem__(self, side: int) -> tuple[int, ...]:
        return self.sides[side]


@dataclass(frozen=True)
class SpaceDescription:
    """Base graph + group + voltages, i.e. one periodic metric graph."""

    base: MetricGraph
    group: GroupSpec
    voltages: VoltageAssignment
    name: str = ""
    max_radius: Fraction | None = None  # exactness limit of truncated (non-periodic) examples
    basepoint: int = 0

    @classmethod
    def from_dict(cls, data: dict) -> "SpaceDescription":
        base = validate_graph(data["base_graph"])
        g = data.get("group") or {"rank": 1}
        ext = g.get("extension") or ()
        group = GroupSpec(int(g["rank"]), tuple(tuple(p) for p in ext))
        volts = VoltageAssignment.from_edges(base, dict(data.get("voltages") or {}), group)
        mr = data.get("max_radius")
        bp = int(data.get("basepoint", 0))
        if not 0 <= bp < base.n_vertices:
            raise GraphValidationError("basepoint is not a vertex")
        return cls(base, group, volts, str(data.get("name", "")),
                   None if mr is None else as_fraction(mr), bp)

    @classmethod
    def load(cls, path) -> "SpaceDescription":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        ext = [list(p) for p in self.group.extension[1:]] if self.group.extension else None
        out = {
            "base_graph": self.base.to_dict(),
            "group": {"rank": self.group.rank, "extension": ext},
            "voltages": {e.id: format_word(self.voltages[2 * i])
                         for i, e in enumerate(self.base.edges)},
        }
        if self.name:
            out["name"] = self.name
        if self.max_radius is not None:
            out["max_radius"] = str(self.max_radius)
        if self.basepoint:
            out["basepoint"] = self.basepoint
        return out

    def expand(self, radius, **kwargs) -> "CoverPatch":
        kwargs.setdefault("basepoint_vertex", self.basepoint)
        return expand_cover(self.base, self.voltages, self.group, radius,
                            max_radius=self.max_radius, **kwargs)


# ---------------------------------------------------------------------------
# derived cover
# ---------------------------------------------------------------------------

class _Codec:
    """Reduced words <-> nonnegative ints (base ``2*rank+1`` digits, last symbol lowest)."""

    def __init__(self, rank: int):
        self.base = 2 * rank + 1

    @staticmethod
    def code(s: int) -> int:
        return 2 * s - 1 if s > 0 else -2 * s

    @staticmethod
    def inv(c: int) -> int:
        return c + 1 if c & 1 else c - 1

    def step(self, g: int, c: int) -> int:
        B = self.base
        if g and g % B == (c + 1 if c & 1 else c - 1):
            return g // B
        return g * B + c

    def mul(self, g: int, word: Sequence[int]) -> int:
        for s in word:
            g = self.step(g, self.code(s))
        return g

    def encode(self, word: Sequence[int]) -> int:
        return self.mul(0, word)

    def decode(self, g: int) -> tuple[int, ...]:
        out = []
        B = self.base
        while g:
            c = g % B
            out.append((c + 1) // 2 if c & 1 else -(c // 2))
            g //= B
        return tuple(reversed(out))


@dataclass(frozen=True, order=True)
class GraphPoint:
    """Point of a cover: a vertex (``side is None``) or ``offset`` along ``side`` from ``vertex``."""

    vertex: int
    side: int | None = None
    offset: Fraction = Fraction(0)

    @property
    def is_vertex(self) -> bool:
        return self.side is None


class Count(NamedTuple):
    value: int
    exact: bool


class CoverPatch:
    """Finite explored region ``B(x, radius)`` of the derived cover.

    Vertices are keyed by ints encoding ``(base vertex, reduced word)``.  All
    vertices within ``radius`` of the basepoint are present, together with every
    edge joining two of them.
    """

    def __init__(self, base: MetricGraph, voltages: VoltageAssignment, group: GroupSpec,
                 radius, basepoint_vertex: int = 0, max_vertices: int = DEFAULT_MAX_VERTICES):
        radius = as_fraction(radius)
        if radius < 0:
            raise ValueError("radius must be >= 0")
        self.base = base
        self.voltages = voltages
        self.group = group
        self.radius = radius
        self.codec = _Codec(group.rank)
        self.scale = base.scale
        self.n_base = base.n_vertices
        self.basepoint_vertex = basepoint_vertex
        self.max_vertices = max_vertices
        self._side_len = [int(base.side_length(s) * self.scale) for s in range(base.n_sides)]
        self._side_codes = [tuple(self.codec.code(s) for s in voltages[side])
                            for side in range(base.n_sides)]
        self._sssp_cache: dict[int, tuple[int, dict[int, int]]] = {}
        self._expand()

    # -- construction -----------------------------------------------------
    def _expand(self):
        nV = self.n_base
        B = self.codec.base
        rs = self.radius * self.scale
        limit = math.floor(rs)
        start = self.basepoint_vertex  # word e encodes to 0
        adj = []
        for v in range(nV):
            row = []
            for s in self.base.sides_from[v]:
                codes = self._side_codes[s]
                row.append((self.base.side_head(s), codes, self._side_len[s]))
            adj.append(row)
        keys: list[int] = []
        dists: list[int] = []
        cap = self.max_vertices
        unit = all(x == 1 for x in self._side_len)
        if unit:
            seen = {start: 0}
            queue = deque([start])
            while queue:
                k = queue.popleft()
                d = seen[k]
                keys.append(k)
                dists.append(d)
                if len(keys) > cap:
                    raise BudgetExceeded(f"cover patch exceeds {cap} vertices")
                if d >= limit:
                    continue
                g, v = divmod(k, nV)
                for head, codes, _ in adj[v]:
                    h = g
                    for c in codes:
                        if h and h % B == (c + 1 if c & 1 else c - 1):
                            h //= B
                        else:
                            h = h * B + c
                    k2 = h * nV + head
                    if k2 not in seen:
                        seen[k2] = d + 1
                        queue.append(k2)
        else:
            best = {start: 0}
            heap = [(0, start)]
            done = set()
            while heap:
                d, k = heapq.heappop(heap)
                if k in done:
                    continue
                done.add(k)
                keys.append(k)
                dists.append(d)
                if len(keys) > cap:
                    raise BudgetExceeded(f"cover patch exceeds {cap} vertices")
                g, v = divmod(k, nV)
                for head, codes, ln in adj[v]:
                    nd = d + ln
                    if nd > limit:
                        continue
                    h = g
                    for c in codes:
                        h = self.codec.step(h, c)
                    k2 = h * nV + head
                    if nd < best.get(k2, nd + 1):
                        best[k2] = nd
                        heapq.heappush(heap, (nd, k2))
        self.keys = keys
        self.index = {k: i for i, k in enumerate(keys)}
        self.dist = np.asarray(dists, dtype=np.int64)
        self.base_of = np.fromiter((k % nV for k in keys), dtype=np.int32, count=len(keys))

    # -- keys ---------------------------------------------------------------
    @property
    def basepoint(self) -> GraphPoint:
        return GraphPoint(self.basepoint_vertex)

    def __len__(self):
        return len(self.keys)

    def __contains__(self, key: int) -> bool:
        return key in self.index

    def key(self, v: int, word: Sequence[int] | str = ()) -> int:
        if isinstance(word, str):
            word = parse_word(word)
        return self.codec.encode(free_reduce(word)) * self.n_base + v

    def split_key(self, key: int) -> tuple[int, tuple[int, ...]]:
        g, v = divmod(key, self.n_base)
        return v, self.codec.decode(g)

    def vertex(self, word: Sequence[int] | str = (), v: int | None = None) -> GraphPoint:
        v = self.basepoint_vertex if v is None else v
        k = self.key(v, word)
        if k not in self.index:
            raise UncertifiedError(f"vertex {word!r} lies outside the patch")
        return GraphPoint(k)

    def head_key(self, key: int, side: int) -> int:
        g, v = divmod(key, self.n_base)
        if self.base.side_tail(side) != v:
            raise ValueError(f"side {side} does not leave base vertex {v}")
        for c in self._side_codes[side]:
            g = self.codec.step(g, c)
        return g * self.n_base + self.base.side_head(side)

    def neighbors(self, key: int):
        """``(side, neighbour key, scaled length)`` for every side leaving ``key``."""
        g, v = divmod(key, self.n_base)
        out = []
        for s in self.base.sides_from[v]:
            h = g
            for c in self._side_codes[s]:
                h = self.codec.step(h, c)
            out.append((s, h * self.n_base + self.base.side_head(s), self._side_len[s]))
        return out

    def translate_key(self, g: Sequence[int], key: int) -> int:
        """Deck transformation by the free-group word ``g``."""
        h, v = divmod(key, self.n_base)
        word = free_reduce(tuple(g) + self.codec.decode(h))
        return self.codec.encode(word) * self.n_base + v

    def translate(self, g: Sequence[int], p: GraphPoint) -> GraphPoint:
        return GraphPoint(self.translate_key(g, p.vertex), p.side, p.offset)

    # -- points -------------------------------------------------------------
    def point_on(self, key: int, side: int, offset) -> GraphPoint:
        """Canonical point at ``offset`` along ``side`` starting from vertex ``key``."""
        offset = as_fraction(offset)
        L = self.base.side_length(side)
        if not 0 <= offset <= L:
            raise ValueError("offset outside the edge")
        if offset == 0:
            return GraphPoint(key)
        head = self.head_key(key, side)
        if offset == L:
            return GraphPoint(head)
        a = (key, side)
        b = (head, side ^ 1)
        if b < a:
            return GraphPoint(head, side ^ 1, L - offset)
        return GraphPoint(key, side, offset)

    def _ends(self, p: GraphPoint):
        if p.side is None:
            return [(p.vertex, Fraction(0))]
        L = self.base.side_length(p.side)
        return [(p.vertex, p.offset), (self.head_key(p.vertex, p.side), L - p.offset)]

    def _edge_id(self, p: GraphPoint):
        head = self.head_key(p.vertex, p.side)
        return min((p.vertex, p.side), (head, p.side ^ 1))

    def dist_to_base(self, p: GraphPoint) -> Fraction:
        best = None
        for k, extra in self._ends(p):
            i = self.index.get(k)
            if i is None:
                raise UncertifiedError("point lies on an edge outside the patch")
            d = Fraction(int(self.dist[i]), self.scale) + extra
            best = d if best is None or d < best else best
        return best

    # -- distances ----------------------------------------------------------
    def _sssp(self, src: int, cutoff: int) -> dict[int, int]:
        cached = self._sssp_cache.get(src)
        if cached is not None and cached[0] >= cutoff:
            return cached[1]
        if src not in self.index:
            raise UncertifiedError("source vertex outside the patch")
        best = {src: 0}
        heap = [(0, src)]
        done = {}
        index = self.index
        while heap:
            d, k = heapq.heappop(heap)
            if k in done:
                continue
            done[k] = d
            for _, k2, ln in self.neighbors(k):
                nd = d + ln
                if nd <= cutoff and k2 in index and nd < best.get(k2, nd + 1):
                    best[k2] = nd
                    heapq.heappush(heap, (nd, k2))
        if len(self._sssp_cache) > 50_000:
            self._sssp_cache.clear()
        self._sssp_cache[src] = (cutoff, done)
        return done

    def local_ball(self, src: int, cutoff) -> dict[int, int]:
        """Scaled distances from ``src`` to every cover vertex within ``cutoff``.

        Exact in the infinite cover: a path of length ``<= cutoff`` never leaves
        the ball it explores, so no patch membership is needed.
        """
        limit = math.floor(as_fraction(cutoff) * self.scale)
        best = {src: 0}
        heap = [(0, src)]
        done: dict[int, int] = {}
        while heap:
            d, k = heapq.heappop(heap)
            if k in done:
                continue
            done[k] = d
            for _, k2, ln in self.neighbors(k):
                nd = d + ln
                if nd <= limit and nd < best.get(k2, nd + 1):
                    best[k2] = nd
                    heapq.heappush(heap, (nd, k2))
        return done

    def _raw_vertex_distance(self, a: int, b: int, cutoff: int):
        if a == b:
            return 0
        if a == self.basepoint_vertex and b in self.index:
            return int(self.dist[self.index[b]])
        if b == self.basepoint_vertex and a in self.index:
            return int(self.dist[self.index[a]])
        return self._sssp(a, cutoff).get(b)

    def distance(self, p: GraphPoint, q: GraphPoint) -> Fraction:
        """Exact, certified path distance between two points of the patch."""
        dxp = self.dist_to_base(p)
        dxq = self.dist_to_base(q)
        slack = 2 * self.radius - dxp - dxq
        if slack < 0:
            raise UncertifiedError("points too far from the basepoint to certify")
        cutoff = math.floor((slack + 2 * max(self.base.side_length(s) for s in range(self.base.n_sides))) * self.scale)
        best = None
        for a, ea in self._ends(p):
            for b, eb in self._ends(q):
                raw = self._raw_vertex_distance(a, b, cutoff)
                if raw is None:
                    continue
                d = ea + eb + Fraction(raw, self.scale)
                if best is None or d < best:
                    best = d
        if p.side is not None and q.side is not None and self._edge_id(p) == self._edge_id(q):
            # same cover edge: direct route along it
            tp = p.offset if (p.vertex, p.side) == self._edge_id(p) else self.base.side_length(p.side) - p.offset
            tq = q.offset if (q.vertex, q.side) == self._edge_id(q) else self.base.side_length(q.side) - q.offset
            direct = abs(tp - tq)
            best = direct if best is None or direct < best else best
        if best is None or (dxp + dxq + best) > 2 * self.radius:
            raise UncertifiedError("distance query beyond the certified radius")
        return best

    def vertex_distance(self, a: int, b: int) -> Fraction:
        return self.distance(GraphPoint(a), GraphPoint(b))

    def certified_for(self, p: GraphPoint) -> Fraction:
        """Largest distance from ``p`` that every query is guaranteed to answer."""
        return self.radius - self.dist_to_base(p)


def expand_cover(base: MetricGraph, voltages: VoltageAssignment, spec: GroupSpec, radius,
                 basepoint_vertex: int = 0, max_vertices: int = DEFAULT_MAX_VERTICES,
                 max_radius=None) -> CoverPatch:
    radius = as_fraction(radius)
    if max_radius is not None and radius > max_radius:
        raise UncertifiedError(f"space description is exact only up to radius {max_radius}")
    return CoverPatch(base, voltages, spec, radius, basepoint_vertex, max_vertices)


def distance(patch: CoverPatch, p: GraphPoint, q: GraphPoint) -> Fraction:
    return patch.distance(p, q)


def _check_horizon(patch: CoverPatch, T) -> Fraction:
    T = as_fraction(T)
    if T < 0:
        raise ValueError("horizon must be >= 0")
    if T > patch.radius:
        raise UncertifiedError(f"horizon {T} beyond patch radius {patch.radius}")
    return T


def sphere_and_ball_counts(patch: CoverPatch, T) -> tuple[int, int]:
    """Vertex counts of the closed ball ``B(x, T)`` and of the sphere ``S(x, T)``."""
    T = _check_horizon(patch, T) * patch.scale
    ball = int(np.count_nonzero(patch.dist <= T))
    sphere = int(np.count_nonzero(patch.dist == T)) if T.denominator == 1 else 0
    return ball, sphere


def orbit_count(patch: CoverPatch, T) -> int:
    """``#(orbit of x in the closed ball B(x, T))``; orbit points are the fibre of the base vertex."""
    T = _check_horizon(patch, T) * patch.scale
    mask = (patch.dist <= T) & (patch.base_of == patch.basepoint_vertex)
    return int(np.count_nonzero(mask))


def systole(patch: CoverPatch, p: GraphPoint) -> Fraction:
    """Minimal displacement of ``p`` by a nontrivial deck transformation."""
    anchor = p.vertex
    off = Fraction(0) if p.side is None else p.offset
    v, u = patch.split_key(anchor)
    room = patch.certified_for(GraphPoint(anchor))
    if room <= 0:
        raise UncertifiedError("point on the patch boundary")
    reach = patch._sssp(anchor, math.floor(room * patch.scale))
    fibre = sorted((d, k) for k, d in reach.items() if k != anchor and k % patch.n_base == v)
    best = None
    for d_int, k in fibre:
        d = Fraction(d_int, patch.scale)
        if best is not None and d - 2 * off >= best:
            return best
        g = free_reduce(patch.split_key(k)[1] + invert_word(u))
        try:
            val = patch.distance(p, patch.translate(g, p))
        except UncertifiedError:
            break
        if best is None or val < best:
            best = val
    else:
        # every translate beyond the searched ball moves p by more than room - 2*off
        if best is not None and best <= room - 2 * off:
            return best
    raise UncertifiedError("systole not certified at this radius")


# ---------------------------------------------------------------------------
# packing and covering
# ---------------------------------------------------------------------------

def _distance_matrix(points, metric) -> list[list[Fraction]]:
    if metric is None:
        return [list(row) for row in points]
    n = len(points)
    D = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            D[i][j] = D[j][i] = metric(points[i], points[j])
    return D


def _max_independent(adj: list[int], n: int) -> int:
    best = 0

    def rec(cand: int, size: int):
        nonlocal best
        if cand == 0:
            best = max(best, size)
            return
        if size + bin(cand).count("1") <= best:
            return
        i = (cand & -cand).bit_length() - 1
        rec(cand & ~(1 << i) & ~adj[i], size + 1)
        if adj[i] & cand:
            rec(cand & ~(1 << i), size)

    rec((1 << n) - 1, 0)
    return best


def _min_dominating(nbhd: list[int], n: int) -> int:
    full = (1 << n) - 1
    coverers = [0] * n
    for i in range(n):
        m = nbhd[i]
        for j in range(n):
            if m >> j & 1:
                coverers[j] |= 1 << i
    best = n
    maxcov = max(bin(m).count("1") for m in nbhd)

    def rec(covered: int, size: int):
        nonlocal best
        if covered == full:
            best = min(best, size)
            return
        left = n - bin(covered).count("1")
        if size + -(-left // maxcov) >= best:
            return
        # branch on the uncovered point with fewest coverers
        j = min((j for j in range(n) if not covered >> j & 1),
                key=lambda j: bin(coverers[j]).count("1"))
        c = coverers[j]
        while c:
            i = (c & -c).bit_length() - 1
            c &= c - 1
            rec(covered | nbhd[i], size + 1)

    rec(0, 0)
    return best


def packing_number(points: Sequence, r, metric: Callable | None = None, exact_cap: int = 20) -> Count:
    """Maximal size of an ``r``-separated subset (pairwise distance ``> r``).

    ``metric`` is a distance callable; pass ``None`` when ``points`` already is a
    distance matrix.  Exact search below ``exact_cap`` points, greedy lower bound above.
    """
    n = len(points)
    if n == 0:
        return Count(0, True)
    r = as_fraction(r)
    D = _distance_matrix(points, metric)
    if n <= exact_cap:
        adj = [sum(1 << j for j in range(n) if j != i and D[i][j] <= r) for i in range(n)]
        return Count(_max_independent(adj, n), True)
    chosen: list[int] = []
    for i in range(n):
        if all(D[i][j] > r for j in chosen):
            chosen.append(i)
    return Count(len(chosen), False)


def covering_number(points: Sequence, r, metric: Callable | None = None, exact_cap: int = 20) -> Count:
    """Minimal size of an ``r``-dense subset (every point within ``<= r`` of a chosen one)."""
    n = len(points)
    if n == 0:
        return Count(0, True)
    r = as_fraction(r)
    D = _distance_matrix(points, metric)
    nbhd = [sum(1 << j for j in range(n) if D[i][j] <= r) for i in range(n)]
    if n <= exact_cap:
        return Count(_min_dominating(nbhd, n), True)
    covered = 0
    full = (1 << n) - 1
    count = 0
    while covered != full:
        i = max(range(n), key=lambda i: bin(nbhd[i] & ~covered).count("1"))
        covered |= nbhd[i]
        count += 1
    return Count(count, False)
