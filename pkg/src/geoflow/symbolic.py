"""Subshifts of finite type over involutive edge alphabets.

A :class:`ShiftSpace` stores its language as a de Bruijn style graph: states are
admissible words of a fixed length ``window`` and an edge ``u -> w`` exists when
``u[1:] == w[:-1]`` and ``u + w[-1:]`` is admissible.  Word counts are exact
integers and entropies come with certified Collatz-Wielandt brackets.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterator, NamedTuple, Sequence

from .exceptions import GeoflowError, UncertifiedError
from .space import CoverPatch, MetricGraph


@dataclass(frozen=True)
class InvolutiveAlphabet:
    labels: tuple[str, ...]
    involution: tuple[int, ...]

    def __post_init__(self):
        n = len(self.labels)
        if len(self.involution) != n:
            raise ValueError("involution size mismatch")
        for s, t in enumerate(self.involution):
            if t == s or not 0 <= t < n or self.involution[t] != s:
                raise ValueError("involution must be a fixed-point-free pairing")

    @classmethod
    def from_graph(cls, graph: MetricGraph) -> "InvolutiveAlphabet":
        n = graph.n_sides
        return cls(tuple(graph.side_label(s) for s in range(n)),
                   tuple(s ^ 1 for s in range(n)))

    def __len__(self):
        return len(self.labels)

    def bar(self, s: int) -> int:
        return self.involution[s]


@dataclass(frozen=True)
class SymbolPartition:
    """Partition of the symbols into named classes."""

    classes: tuple[tuple[int, ...], ...]
    names: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.names:
            object.__setattr__(self, "names", tuple(f"c{i}" for i in range(len(self.classes))))
        if len(self.names) != len(self.classes):
            raise ValueError("one name per class")
        if any(not c for c in self.classes):
            raise ValueError("empty class in partition")

    @classmethod
    def from_labels(cls, graph: MetricGraph, groups: Sequence[Sequence[str]],
                    names: Sequence[str] = ()) -> "SymbolPartition":
        return cls(tuple(tuple(graph.side_by_label(lab) for lab in g) for g in groups),
                   tuple(names))

    @classmethod
    def identity(cls, alphabet: InvolutiveAlphabet) -> "SymbolPartition":
        return cls(tuple((s,) for s in range(len(alphabet))), alphabet.labels)

    @classmethod
    def single_class(cls, alphabet: InvolutiveAlphabet, name: str = "a") -> "SymbolPartition":
        return cls((tuple(range(len(alphabet))),), (name,))

    def class_map(self, alphabet: InvolutiveAlphabet) -> tuple[int, ...]:
        n = len(alphabet)
        cmap = [-1] * n
        for ci, members in enumerate(self.classes):
            for s in members:
                if not 0 <= s < n or cmap[s] != -1:
                    raise ValueError("partition classes must be disjoint and inside the alphabet")
                cmap[s] = ci
        if -1 in cmap:
            raise ValueError("partition does not cover the alphabet")
        # class of s-bar must be a function of the class of s
        induced: dict[int, int] = {}
        for s in range(n):
            c, cb = cmap[s], cmap[alphabet.bar(s)]
            if induced.setdefault(c, cb) != cb:
                raise ValueError("partition incompatible with the involution")
        return tuple(cmap)


class EntropyValue(NamedTuple):
    value: float
    lo: float
    hi: float
    exact: bool
    iterations: int = 0


@dataclass(frozen=True)
class ShiftSpace:
    """SFT presented on states of length ``window`` over symbols ``0..len(labels)-1``."""

    labels: tuple[str, ...]
    window: int
    states: tuple[tuple[int, ...], ...]
    successors: tuple[tuple[int, ...], ...]
    provenance: str
    forbidden: tuple[tuple[int, ...], ...] = ()
    order: int | None = None  # longest constrained word length (L of a geodesic shift)

    def __post_init__(self):
        if len(self.states) != len(self.successors):
            raise ValueError("one successor list per state")

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def is_empty(self) -> bool:
        return not self.states

    @property
    def alphabet_symbols(self) -> tuple[int, ...]:
        return tuple(sorted({w[0] for w in self.states})) if self.window else ()

    def out_degrees(self) -> list[int]:
        return [len(s) for s in self.successors]

    def in_degrees(self) -> list[int]:
        deg = [0] * self.n_states
        for succ in self.successors:
            for j in succ:
                deg[j] += 1
        return deg

    def format(self, word: Sequence[int]) -> str:
        return "".join(self.labels[s] for s in word)

    def to_dict(self) -> dict:
        return {
            "provenance": self.provenance,
            "window": self.window,
            "order": self.order,
            "states": [self.format(w) for w in self.states],
            "transitions": [[self.format(self.states[i]), self.format(self.states[j])]
                            for i, succ in enumerate(self.successors) for j in succ],
            "forbidden": [self.format(w) for w in self.forbidden],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def _build(labels, window, transitions: dict, provenance, forbidden=(), order=None) -> ShiftSpace:
    """Prune ``transitions`` (word -> set of successor words) to its recurrent core."""
    alive = {w: set(v) for w, v in transitions.items()}
    for v in alive.values():
        v &= alive.keys()
    changed = True
    while changed:
        changed = False
        has_in = set()
        for v in alive.values():
            has_in |= v
        dead = [w for w, v in alive.items() if not v or w not in has_in]
        if dead:
            changed = True
            for w in dead:
                del alive[w]
            for v in alive.values():
                v.difference_update(dead)
    states = tuple(sorted(alive))
    index = {w: i for i, w in enumerate(states)}
    succ = tuple(tuple(sorted(index[u] for u in alive[w])) for w in states)
    return ShiftSpace(tuple(labels), window, states, succ, provenance,
                      tuple(sorted(forbidden, key=lambda w: (len(w), w))), order)


def shift_from_words(labels, words: Sequence[Sequence[int]], provenance: str = "words") -> ShiftSpace:
    """Shift whose allowed (window+1)-words are ``words`` (all of one length >= 2)."""
    words = [tuple(w) for w in words]
    lengths = {len(w) for w in words}
    if len(lengths) != 1 or min(lengths) < 2:
        raise ValueError("allowed words must share one length >= 2")
    k = lengths.pop() - 1
    trans: dict = {}
    for w in words:
        trans.setdefault(w[:-1], set()).add(w[1:])
        trans.setdefault(w[1:], set())
    return _build(labels, k, trans, provenance, order=k + 1)


def local_geodesic_shift(graph: MetricGraph) -> ShiftSpace:
    """Non-backtracking edge paths: ``s -> s'`` iff ``head(s) = tail(s')`` and ``s' != s-bar``."""
    if not graph.is_unit:
        raise GeoflowError("symbolic coding needs unit edge lengths")
    alpha = InvolutiveAlphabet.from_graph(graph)
    trans = {}
    for s in range(graph.n_sides):
        h = graph.side_head(s)
        trans[(s,)] = {(t,) for t in graph.sides_from[h] if t != alpha.bar(s)}
    forbidden = [(s, alpha.bar(s)) for s in range(graph.n_sides)]
    return _build(alpha.labels, 1, trans, "local-geodesic", forbidden, order=2)


def _realizing_words(patch: CoverPatch, L: int):
    """All distance-realizing side words of length ``L`` plus the minimal non-realizing ones."""
    graph = patch.base
    good: list[tuple[int, ...]] = []
    bad: list[tuple[int, ...]] = []
    for v in range(graph.n_vertices):
        src = v  # lift (v, e); realization is deck invariant
        dist = patch.local_ball(src, L)
        # dfs over side paths; prefix closure means a bad prefix kills the branch
        stack: list[tuple[tuple[int, ...], int]] = [((), src)]
        while stack:
            word, key = stack.pop()
            if len(word) == L:
                good.append(word)
                continue
            for s, k2, _ in patch.neighbors(key):
                w2 = word + (s,)
                if dist.get(k2) == len(w2) * patch.scale:
                    stack.append((w2, k2))
                elif _suffix_realizing(patch, w2):
                    bad.append(w2)
    return sorted(good), bad


def _suffix_realizing(patch: CoverPatch, word) -> bool:
    if len(word) <= 1:
        return True
    tail = word[1:]
    src = patch.base.side_tail(tail[0])
    key = src
    for s in tail:
        key = patch.head_key(key, s)
    return patch.local_ball(src, len(tail)).get(key) == len(tail) * patch.scale


def is_realizing(patch: CoverPatch, word: Sequence[int]) -> bool:
    """Whether the lifted side path has length equal to the distance between its ends."""
    if not word:
        return True
    key = src = patch.base.side_tail(word[0])
    total = 0
    for s in word:
        key = patch.head_key(key, s)
        total += patch._side_len[s]
    return patch.local_ball(src, Fraction(total, patch.scale)).get(key) == total


def geodesic_shift(patch: CoverPatch, L: int = 2) -> ShiftSpace:
    """Shift of side words all of whose length-``L`` windows lift to geodesic segments.

    States are realizing words of length ``L - 1``; forbidden words are the minimal
    non-realizing words of length ``<= L``.
    """
    if not patch.base.is_unit:
        raise GeoflowError("symbolic coding needs unit edge lengths")
    if L < 2:
        raise ValueError("geodesic shift window must be >= 2")
    if L > patch.radius:
        raise UncertifiedError(f"window {L} beyond patch radius {patch.radius}")
    good, bad = _realizing_words(patch, L)
    trans: dict = {}
    for w in good:
        trans.setdefault(w[:-1], set()).add(w[1:])
        trans.setdefault(w[1:], set())
    alpha = InvolutiveAlphabet.from_graph(patch.base)
    return _build(alpha.labels, L - 1, trans, "L-geodesic", bad, order=L)


def higher_block(shift: ShiftSpace, window: int) -> ShiftSpace:
    """Recode ``shift`` on states of length ``window >= shift.window``."""
    if window < shift.window:
        raise ValueError("can only enlarge the window")
    if window == shift.window:
        return shift
    recoded = shift_from_words(shift.labels, list(enumerate_words(shift, 0, window)))
    return replace(recoded, provenance=shift.provenance, forbidden=shift.forbidden, order=shift.order)


# ---------------------------------------------------------------------------
# counting and entropy
# ---------------------------------------------------------------------------

def _power_vectors(shift: ShiftSpace, steps: int) -> list[int]:
    v = [1] * shift.n_states
    succ = shift.successors
    for _ in range(steps):
        v = [sum(v[j] for j in s) for s in succ]
    return v


def word_count(shift: ShiftSpace, n: int) -> int:
    """Exact number of admissible words of length ``n``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if shift.is_empty:
        return 0
    if n < shift.window:
        return len({w[:n] for w in shift.states})
    return sum(_power_vectors(shift, n - shift.window))


def sft_entropy(shift: ShiftSpace, max_iter: int = 400, tol: float = 1e-12) -> EntropyValue:
    """``log`` spectral radius with Collatz-Wielandt bracket ``min_i (Av)_i/v_i <= rho <= max_i``.

    Iterates ``v <- (I + A) v`` from the all-ones vector; the shift by ``I``
    removes periodicity without changing the Perron eigenvector.
    """
    if shift.is_empty:
        nan = float("nan")
        return EntropyValue(nan, nan, nan, False)
    succ = shift.successors
    v = [1] * shift.n_states
    best_lo = Fraction(0)
    best_hi = None
    it = 0
    while True:
        av = [sum(v[j] for j in s) for s in succ]
        lo = min(Fraction(a, b) for a, b in zip(av, v))
        hi = max(Fraction(a, b) for a, b in zip(av, v))
        best_lo = max(best_lo, lo)
        best_hi = hi if best_hi is None else min(best_hi, hi)
        if best_lo == best_hi:
            val = math.log(best_lo)
            return EntropyValue(val, val, val, True, it)
        l_, h_ = math.log(best_lo) if best_lo > 0 else -math.inf, math.log(best_hi)
        if h_ - l_ <= tol or it >= max_iter:
            return EntropyValue(0.5 * (l_ + h_) if l_ > -math.inf else h_, l_, h_, False, it)
        it += 1
        v = [a + b for a, b in zip(av, v)]
        g = math.gcd(*v)
        if g > 1:
            v = [x // g for x in v]
        if max(v).bit_length() > 4096:
            # rescale to keep integers small; bracket validity needs only v > 0
            shift_bits = max(v).bit_length() - 2048
            v = [max(1, x >> shift_bits) for x in v]


def entropy_profile(patch: CoverPatch, windows: Sequence[int]) -> dict:
    """Entropy of :func:`geodesic_shift` per window and a stabilization flag (``L`` vs ``L+2``)."""
    values = {L: sft_entropy(geodesic_shift(patch, L)) for L in windows}
    stable = {}
    for L in windows:
        if L + 2 in values:
            a, b = values[L], values[L + 2]
            stable[L] = a.lo == b.lo and a.hi == b.hi
    return {"entropy": values, "stable": stable}


def enumerate_words(shift: ShiftSpace, m: int, n: int) -> Iterator[tuple[int, ...]]:
    """Admissible words indexed by positions ``m..n`` in lexicographic order."""
    length = n - m + 1
    if length < 1:
        raise ValueError("empty window")
    if shift.is_empty:
        return
    w = shift.window
    if length <= w:
        yield from sorted({s[:length] for s in shift.states})
        return
    states = shift.states
    succ = shift.successors
    # successors sorted by appended symbol keeps the stream lexicographic
    order = [sorted(s, key=lambda j: states[j][-1]) for s in succ]

    def walk(i: int, word: tuple[int, ...]):
        if len(word) == length:
            yield word
            return
        for j in order[i]:
            yield from walk(j, word + (states[j][-1],))

    for i in range(len(states)):
        yield from walk(i, states[i])


# ---------------------------------------------------------------------------
# quotient coding
# ---------------------------------------------------------------------------

def quotient_coding(shift: ShiftSpace, partition: SymbolPartition,
                    alphabet: InvolutiveAlphabet | None = None, window: int | None = None) -> ShiftSpace:
    """Image of ``shift`` under the symbol map of ``partition``.

    Class words of length ``window + 1`` are admissible iff some lift is; the
    result is the finite-type envelope of the image at that window.
    """
    if alphabet is None:
        n = len(shift.labels)
        alphabet = InvolutiveAlphabet(shift.labels, tuple(s ^ 1 for s in range(n)))
    cmap = partition.class_map(alphabet)
    k = shift.window if window is None else max(window, shift.window)
    words = {tuple(cmap[s] for s in w) for w in enumerate_words(shift, 0, k)}
    if not words:
        return ShiftSpace(tuple(partition.names), k, (), (), "quotient")
    return shift_from_words(partition.names, sorted(words), "quotient")
